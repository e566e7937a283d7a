"""Exact return counts for random walks on finitely generated matrix groups.

Two backends:

* a generic one over explicit integer matrices (distribution = dict keyed by
  entry tuples), used as the oracle;
* a fast one for ``H = Z x| Z^2``, elements ``(k, v)`` with
  ``(k, v)(k', v') = (k + k', v + M^k v')`` and ``M = [[2,1],[1,1]]``.  The
  distribution is stored per ``k`` as sorted numpy arrays of packed
  translations and int64 counts; one step is shift-and-merge.

``H`` corresponds to the 3x3 matrices ``[[M^k, v], [0, 1]]``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, PrecurseError

DEFAULT_BALL_CAP = int(os.environ.get("PRECURSE_BALL_CAP", 6 * 10**7))

Matrix = tuple[tuple[int, ...], ...]

M_H: Matrix = ((2, 1), (1, 1))
M_H_INV: Matrix = ((1, -1), (-1, 2))


def _mat_mul(A: Matrix, B: Matrix) -> Matrix:
    cols = list(zip(*B))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in A)


def _mat_pow2(k: int) -> Matrix:
    """``M^k`` for the 2x2 matrix of H, any integer k."""
    base = M_H if k >= 0 else M_H_INV
    R: Matrix = ((1, 0), (0, 1))
    for _ in range(abs(k)):
        R = _mat_mul(R, base)
    return R


@dataclass(frozen=True)
class WalkGroupElement:
    k: int
    v: tuple[int, int] = (0, 0)

    def __mul__(self, other: "WalkGroupElement") -> "WalkGroupElement":
        A = _mat_pow2(self.k)
        w = other.v
        return WalkGroupElement(
            self.k + other.k,
            (self.v[0] + A[0][0] * w[0] + A[0][1] * w[1], self.v[1] + A[1][0] * w[0] + A[1][1] * w[1]),
        )

    def inverse(self) -> "WalkGroupElement":
        B = _mat_pow2(-self.k)
        v = self.v
        return WalkGroupElement(-self.k, (-(B[0][0] * v[0] + B[0][1] * v[1]), -(B[1][0] * v[0] + B[1][1] * v[1])))

    def matrix(self) -> Matrix:
        A = _mat_pow2(self.k)
        return ((A[0][0], A[0][1], self.v[0]), (A[1][0], A[1][1], self.v[1]), (0, 0, 1))

    @classmethod
    def from_matrix(cls, X: Matrix) -> "WalkGroupElement":
        if tuple(X[2]) != (0, 0, 1):
            raise PrecurseError("not an element of H: bottom row must be (0, 0, 1)")
        A = ((X[0][0], X[0][1]), (X[1][0], X[1][1]))
        # M^k has trace Lucas(2k) >= 3 except k = 0; walk outward until it matches
        for k in range(0, 200):
            for s in ((k, -k) if k else (0,)):
                if _mat_pow2(s) == A:
                    return cls(s, (X[0][2], X[1][2]))
        raise PrecurseError("not an element of H: upper block is not a power of M")


IDENTITY = WalkGroupElement(0)


@dataclass(frozen=True)
class GeneratingSet:
    elements: tuple
    weights: tuple[int, ...]
    inverse: Callable | None = None

    def __post_init__(self):
        if len(self.elements) != len(self.weights):
            raise ValueError("one weight per element")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    def is_symmetric(self) -> bool:
        if self.inverse is None:
            return False
        table = dict(zip(self.elements, self.weights))
        return all(table.get(self.inverse(g)) == w for g, w in table.items())


def h_fixture() -> dict:
    return json.loads(resources.files("precurse").joinpath("data/h_walk.json").read_text())


def _as_matrix(rows) -> Matrix:
    return tuple(tuple(int(x) for x in r) for r in rows)


def matrix_inverse_unimodular(X: Matrix) -> Matrix:
    """Exact inverse of an integer matrix with determinant +-1 (adjugate)."""
    from fractions import Fraction as F

    n = len(X)
    A = [[F(v) for v in row] + [F(int(i == j)) for j in range(n)] for i, row in enumerate(X)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c])
        A[c], A[p] = A[p], A[c]
        pv = A[c][c]
        A[c] = [v / pv for v in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    out = []
    for row in A:
        right = row[n:]
        if any(v.denominator != 1 for v in right):
            raise PrecurseError("matrix is not unimodular")
        out.append(tuple(int(v) for v in right))
    return tuple(out)


def matrix_generating_set(data: dict | None = None) -> GeneratingSet:
    data = data or h_fixture()
    mats = tuple(_as_matrix(m) for m in data["generators"])
    return GeneratingSet(mats, tuple(data.get("weights", [1] * len(mats))), matrix_inverse_unimodular)


def h_generating_set(data: dict | None = None) -> GeneratingSet:
    """The fixture generators as normal-form elements of H."""
    data = data or h_fixture()
    els = tuple(WalkGroupElement.from_matrix(_as_matrix(m)) for m in data["generators"])
    return GeneratingSet(els, tuple(data.get("weights", [1] * len(els))), WalkGroupElement.inverse)


# ---------------------------------------------------------------------------
# generic (dict) backend


@dataclass
class Distribution:
    counts: dict
    n: int = 0

    def mass(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, g) -> int:
        return self.counts.get(g, 0)


def delta(identity) -> Distribution:
    return Distribution({identity: 1}, 0)


def step(d: Distribution, S: GeneratingSet, mul: Callable | None = None, cap: int = DEFAULT_BALL_CAP) -> Distribution:
    """Right-multiply every element of the support by every generator."""
    mul = mul or (lambda a, b: a * b)
    out: dict = {}
    for g, c in d.counts.items():
        for s, w in zip(S.elements, S.weights):
            h = mul(g, s)
            out[h] = out.get(h, 0) + c * w
        if len(out) > cap:
            raise BudgetExceeded("walk ball", len(out), cap)
    return Distribution(out, d.n + 1)


def generic_walk(S: GeneratingSet, identity, N: int, mul: Callable | None = None, cap: int = DEFAULT_BALL_CAP):
    """Yield the distribution after 0..N steps."""
    d = delta(identity)
    yield d
    for _ in range(N):
        d = step(d, S, mul, cap)
        yield d


def matrix_identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def matrix_walk(N: int, data: dict | None = None, cap: int = DEFAULT_BALL_CAP):
    S = matrix_generating_set(data)
    return generic_walk(S, matrix_identity(len(S.elements[0])), N, _mat_mul, cap)


def backend_crosscheck(n: int, data: dict | None = None) -> bool:
    """Normal-form walk and literal matrix walk give the same distribution for every step <= n."""
    Sh = h_generating_set(data)
    for dh, dm in zip(generic_walk(Sh, IDENTITY, n), matrix_walk(n, data)):
        if {g.matrix(): c for g, c in dh.counts.items()} != dm.counts:
            return False
    return True


# ---------------------------------------------------------------------------
# sliced numpy backend for H

_SHIFT = np.int64(1 << 32)


def _pack(v1: int, v2: int) -> int:
    # v1 * 2^32 + v2 is injective while |v2| < 2^31, and additive
    return v1 * (1 << 32) + v2


def _unpack(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    low = (keys + np.int64(1 << 31)) & np.int64((1 << 32) - 1)
    v2 = low - np.int64(1 << 31)
    v1 = (keys - v2) >> np.int64(32)
    return v1, v2


def _merge(keys: list[np.ndarray], counts: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    K = np.concatenate(keys)
    C = np.concatenate(counts)
    order = np.argsort(K, kind="stable")
    K, C = K[order], C[order]
    starts = np.flatnonzero(np.r_[True, K[1:] != K[:-1]])
    return K[starts], np.add.reduceat(C, starts)


class SlicedWalk:
    """Distribution on H as ``{k: (sorted packed v, counts)}``, for the six generators of E.

    Counts are int64: the total mass after n steps is ``6^n``, which fits
    through n = 24.
    """

    MAX_STEPS = 24

    def __init__(self, cap: int = DEFAULT_BALL_CAP):
        self.cap = cap
        self.n = 0
        self.slices: dict[int, tuple[np.ndarray, np.ndarray]] = {
            0: (np.array([_pack(0, 0)], dtype=np.int64), np.array([1], dtype=np.int64))
        }

    def size(self) -> int:
        return sum(len(k) for k, _ in self.slices.values())

    def step(self) -> "SlicedWalk":
        if self.n >= self.MAX_STEPS:
            raise BudgetExceeded("int64 walk counts (steps)", self.n + 1, self.MAX_STEPS)
        d = self.slices
        new: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for k in range(min(d) - 1, max(d) + 2):
            ks, cs = [], []
            # (k -+ 1, v) * (+-1, 0)
            for src in (k - 1, k + 1):
                if src in d:
                    ks.append(d[src][0])
                    cs.append(d[src][1])
            # (k, v) * (0, +-e_i) = (k, v +- M^k e_i)
            if k in d:
                A = _mat_pow2(k)
                for col in ((A[0][0], A[1][0]), (A[0][1], A[1][1])):
                    shift = np.int64(_pack(*col))
                    ks += [d[k][0] + shift, d[k][0] - shift]
                    cs += [d[k][1], d[k][1]]
            if ks:
                new[k] = _merge(ks, cs)
        self.slices = new
        self.n += 1
        size = self.size()
        if size > self.cap:
            raise BudgetExceeded("walk ball", size, self.cap)
        return self

    def count(self, g: WalkGroupElement) -> int:
        sl = self.slices.get(g.k)
        if sl is None:
            return 0
        key = _pack(*g.v)
        i = int(np.searchsorted(sl[0], key))
        return int(sl[1][i]) if i < len(sl[0]) and sl[0][i] == key else 0

    def mass(self) -> int:
        return sum(int(c.sum()) for _, c in self.slices.values())

    def as_dict(self) -> dict[WalkGroupElement, int]:
        out = {}
        for k, (K, C) in self.slices.items():
            v1, v2 = _unpack(K)
            for a, b, c in zip(v1.tolist(), v2.tolist(), C.tolist()):
                out[WalkGroupElement(k, (a, b))] = c
        return out

    def is_inversion_symmetric(self) -> bool:
        """``count(g) == count(g^-1)`` for every g in the support."""
        for k, (K, C) in self.slices.items():
            other = self.slices.get(-k)
            if other is None or len(other[0]) != len(K):
                return False
            B = _mat_pow2(-k)
            v1, v2 = _unpack(K)
            w1 = -(B[0][0] * v1 + B[0][1] * v2)
            w2 = -(B[1][0] * v1 + B[1][1] * v2)
            inv = w1 * _SHIFT + w2
            order = np.argsort(inv, kind="stable")
            if not (np.array_equal(inv[order], other[0]) and np.array_equal(C[order], other[1])):
                return False
        return True


@dataclass
class WalkStats:
    n: int
    a_n: int
    mass: int
    ball: int
    symmetric: bool | None


def h_walk(N: int, cap: int = DEFAULT_BALL_CAP, check_symmetry: bool = False):
    """Yield :class:`WalkStats` for steps 0..N of the E-walk on H."""
    w = SlicedWalk(cap)
    for n in range(N + 1):
        if n:
            w.step()
        yield WalkStats(n, w.count(IDENTITY), w.mass(), w.size(), w.is_inversion_symmetric() if check_symmetry else None)


def return_counts(N: int, cap: int = DEFAULT_BALL_CAP) -> list[int]:
    """``a_0 .. a_N`` for the E-walk on H."""
    return [s.a_n for s in h_walk(N, cap)]


def generic_return_counts(S: GeneratingSet, identity, N: int, mul: Callable | None = None, cap: int = DEFAULT_BALL_CAP):
    return [d[identity] for d in generic_walk(S, identity, N, mul, cap)]


def exhaustive_return_count(n: int, data: dict | None = None) -> int:
    """Oracle: push every one of the ``|E|^n`` generator sequences through H, no merging."""
    if n > 10:
        raise BudgetExceeded("exhaustive sequences", 6**n, 6**10)
    S = h_generating_set(data)
    k = np.zeros(1, dtype=np.int64)
    v1 = np.zeros(1, dtype=np.int64)
    v2 = np.zeros(1, dtype=np.int64)
    # entries of M^j for j = -n..n, indexed by j + n
    table = np.array([[e for row in _mat_pow2(j) for e in row] for j in range(-n, n + 1)], dtype=np.int64)
    for _ in range(n):
        nk, n1, n2 = [], [], []
        A = table[k + n]
        for g in S.elements:
            x, y = g.v
            nk.append(k + g.k)
            if g.k:
                n1.append(v1)
                n2.append(v2)
            else:
                n1.append(v1 + A[:, 0] * x + A[:, 1] * y)
                n2.append(v2 + A[:, 2] * x + A[:, 3] * y)
        k, v1, v2 = np.concatenate(nk), np.concatenate(n1), np.concatenate(n2)
    return int(np.count_nonzero((k == 0) & (v1 == 0) & (v2 == 0)))


def return_probability(counts: Sequence[int], size: int) -> list[Fraction]:
    return [Fraction(a, size**n) for n, a in enumerate(counts)]


# ---------------------------------------------------------------------------
# diagnostic fitting (floating point, non-certifying)

SHAPES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "linear": lambda n: n,
    "cube_root": lambda n: np.cbrt(n),
    "log": lambda n: np.log(n),
}


@dataclass
class ShapeFit:
    shape: str
    intercept: float
    slope: float
    residual: float


@dataclass
class AsymptoticReport:
    points: int
    fits: list[ShapeFit]

    @property
    def best(self) -> ShapeFit:
        return min(self.fits, key=lambda f: f.residual)


def asymptotic_report(p_even: Sequence, min_points: int = 8) -> AsymptoticReport:
    """Fit ``log p(2n) = a + c f(n)`` for each shape ``f`` over ``n = 1..N``.

    ``p_even[i]`` is ``p(2(i+1))``, i.e. index 0 holds ``p(2)``.  The residual
    is the root-mean-square error of the fit; no asymptotic claim is made.
    """
    y = np.array([float(np.log(float(p))) if not isinstance(p, Fraction) else _log_fraction(p) for p in p_even])
    if len(y) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(y)}")
    n = np.arange(1, len(y) + 1, dtype=float)
    fits = []
    for name, f in SHAPES.items():
        A = np.column_stack([np.ones_like(n), f(n)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
        fits.append(ShapeFit(name, float(coef[0]), float(coef[1]), resid))
    return AsymptoticReport(len(y), fits)


def _log_fraction(p: Fraction) -> float:
    if p <= 0:
        raise ValueError("probabilities must be positive to take logs")
    # exact integers can exceed float range; split into bit lengths first
    num, den = p.numerator, p.denominator
    sn, sd = max(num.bit_length() - 60, 0), max(den.bit_length() - 60, 0)
    return float(np.log(num >> sn) - np.log(den >> sd) + (sn - sd) * np.log(2.0))


def even_probabilities(counts: Sequence[int], size: int) -> list[Fraction]:
    """``p(2), p(4), ...`` from ``a_0 .. a_N``."""
    probs = return_probability(counts, size)
    return [probs[m] for m in range(2, len(probs), 2)]
