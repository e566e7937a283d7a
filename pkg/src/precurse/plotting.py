"""PNG figures for the CLI report paths (headless matplotlib)."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps repeated runs byte-identical
_META = {"Software": None}


def _save(fig, path: str):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)


def plot_indicator(ns: Sequence[int], bits: Sequence[int], path: str, title: str = "accepting lengths"):
    fig, ax = plt.subplots(figsize=(8, 2.6))
    ns = np.asarray(ns)
    bits = np.asarray(bits)
    ax.vlines(ns[bits == 1], 0, 1, color="C0")
    ax.plot(ns[bits == 1], np.ones(int(bits.sum())), "o", color="C0", ms=4)
    ax.set_ylim(-0.1, 1.3)
    ax.set_yticks([0, 1])
    ax.set_xlabel("n")
    ax.set_ylabel("b_n")
    ax.set_title(title)
    _save(fig, path)


def plot_complexity(ns: Sequence[int], counts: Sequence[int], path: str, label: str = "prefix"):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(ns, counts, "o-", label=f"c(n), {label}")
    ax.semilogy(ns, [2.0**n for n in ns], "--", color="gray", label="2^n")
    ax.set_xlabel("n")
    ax.set_ylabel("distinct factors")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_walk(ns: Sequence[int], log_p: Sequence[float], path: str, fits=None):
    """log p(2n) against n, with fitted shapes overlaid when given."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = np.asarray(ns, dtype=float)
    ax.plot(ns, log_p, "ko", ms=4, label="log p(2n)")
    if fits:
        from .walk import SHAPES

        grid = np.linspace(ns.min(), ns.max(), 200)
        for f in fits:
            ax.plot(grid, f.intercept + f.slope * SHAPES[f.shape](grid), label=f"{f.shape} (rms {f.residual:.2e})")
    ax.set_xlabel("n")
    ax.set_ylabel("log p(2n)")
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)
