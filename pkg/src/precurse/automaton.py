"""Digraphs whose edges carry elements of X x Y, and their accepting paths.

A path is *accepting* when it runs from the source to the sink and the
products of its X-labels and of its Y-labels are both trivial; each factor
acts as a stack.  The bundled graph ``gamma`` (see ``data/gamma.aut``) is a
two-stack machine with exactly one accepting path of each length ``L(k, j)``
where the ``j``-th binary digit of ``k`` is 1, so its accepting-length
indicator ``b_n`` writes every positive integer in binary.

File format, one directive per line (``#`` starts a comment)::

    alphabet X x 0x 1x        # optional; defaults to the fixture alphabets
    alphabet Y y 0y 1y
    vertex s1
    source s1
    sink s8
    edge s1 s1 : x y          # label in word syntax, X and Y tokens mixed
    edge s5 s6 :              # empty label is the identity
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass
from importlib import resources
from typing import Iterator

from .errors import BudgetExceeded, PrecurseError
from .ring import DEFAULT_TERM_CAP
from ._pushdown import StackDistance
from .words import X_ALPHABET, Y_ALPHABET, Alphabet, PairElement, ReducedWord, inv_letters, mul_letters


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    label: PairElement


@dataclass(frozen=True)
class LabeledAutomaton:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    source: str
    sink: str
    X: Alphabet = X_ALPHABET
    Y: Alphabet = Y_ALPHABET

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("vertex names must be unique")
        known = set(self.vertices)
        for v in (self.source, self.sink):
            if v not in known:
                raise ValueError(f"unknown vertex {v!r}")
        for e in self.edges:
            if e.source not in known or e.target not in known:
                raise ValueError(f"edge {e.source}->{e.target} uses an unknown vertex")
            if e.label.x.alphabet != self.X or e.label.y.alphabet != self.Y:
                raise ValueError("edge label is not over the automaton's alphabets")

    @classmethod
    def parse(cls, text: str) -> "LabeledAutomaton":
        alphabets: dict[str, Alphabet] = {}
        vertices: list[str] = []
        raw_edges: list[tuple[str, str, str]] = []
        source = sink = None
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, rest = line.partition(" ")
            rest = rest.strip()
            if head == "alphabet":
                name, *gens = rest.split()
                if name not in ("X", "Y") or not gens:
                    raise PrecurseError(f"line {lineno}: expected 'alphabet X|Y gen ...'")
                alphabets[name] = Alphabet(name, tuple(gens))
            elif head == "vertex":
                vertices.append(rest)
            elif head == "source":
                source = rest
            elif head == "sink":
                sink = rest
            elif head == "edge":
                ends, colon, label = rest.partition(":")
                parts = ends.split()
                if not colon or len(parts) != 2:
                    raise PrecurseError(f"line {lineno}: expected 'edge SRC DST : LABEL'")
                raw_edges.append((parts[0], parts[1], label.strip()))
            else:
                raise PrecurseError(f"line {lineno}: unknown directive {head!r}")
        if source is None or sink is None:
            raise PrecurseError("automaton needs both 'source' and 'sink'")
        X = alphabets.get("X", X_ALPHABET)
        Y = alphabets.get("Y", Y_ALPHABET)
        edges = tuple(Edge(s, t, PairElement.parse(lab, X, Y)) for s, t, lab in raw_edges)
        return cls(tuple(vertices), edges, source, sink, X, Y)

    def dump(self) -> str:
        lines = [
            "alphabet X " + " ".join(self.X.names),
            "alphabet Y " + " ".join(self.Y.names),
        ]
        lines += [f"vertex {v}" for v in self.vertices]
        lines += [f"source {self.source}", f"sink {self.sink}"]
        for e in self.edges:
            label = str(e.label) if not e.label.is_identity() else ""
            lines.append(f"edge {e.source} {e.target} : {label}".rstrip())
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.dump().encode()).hexdigest()

    def out_edges(self) -> dict[str, list[tuple[int, Edge]]]:
        out: dict[str, list[tuple[int, Edge]]] = {v: [] for v in self.vertices}
        for i, e in enumerate(self.edges):
            out[e.source].append((i, e))
        return out


def gamma() -> LabeledAutomaton:
    """The bundled two-stack graph."""
    text = resources.files("precurse").joinpath("data/gamma.aut").read_text()
    return LabeledAutomaton.parse(text)


@dataclass(frozen=True)
class PathCertificate:
    edges: tuple[Edge, ...]
    # running (omega_X, omega_Y) after each edge
    products: tuple[PairElement, ...]

    @property
    def length(self) -> int:
        return len(self.edges)

    def vertices(self) -> list[str]:
        if not self.edges:
            return []
        return [self.edges[0].source] + [e.target for e in self.edges]

    def __str__(self):
        if not self.edges:
            return ""
        out = [self.edges[0].source]
        for e in self.edges:
            lab = "" if e.label.is_identity() else str(e.label)
            out.append(f"-[{lab}]-> {e.target}" if lab else f"-> {e.target}")
        return " ".join(out)


class _PathCounter:
    """Memoized count of accepting completions from (vertex, omega_X, omega_Y, steps left).

    ``prune="stack"`` drops states that cannot empty both stacks in the steps
    left (exact shortest completion per stack, see :mod:`precurse._pushdown`);
    ``prune="length"`` only uses the per-edge cancellation bound.
    """

    def __init__(self, A: LabeledAutomaton, budget: int, prune: str = "stack"):
        if prune not in ("stack", "length"):
            raise ValueError("prune must be 'stack' or 'length'")
        self.A = A
        self.budget = budget
        self.out = {
            v: [(i, e.target, e.label.x.letters, e.label.y.letters) for i, e in lst]
            for v, lst in A.out_edges().items()
        }
        # one edge can cancel at most this many letters of each stack
        self.lam_x = max((len(e.label.x) for e in A.edges), default=0)
        self.lam_y = max((len(e.label.y) for e in A.edges), default=0)
        self.dist_x = self.dist_y = None
        if prune == "stack":
            if self.lam_x <= 1:
                self.dist_x = StackDistance(A.vertices, [(e.source, e.target, e.label.x.letters) for e in A.edges])
            if self.lam_y <= 1:
                self.dist_y = StackDistance(A.vertices, [(e.source, e.target, e.label.y.letters) for e in A.edges])
        self.memo: dict = {}

    def alive(self, v: str, wx: tuple, wy: tuple, r: int) -> bool:
        if len(wx) > self.lam_x * r or len(wy) > self.lam_y * r:
            return False
        sink = self.A.sink
        if self.dist_x is not None and self.dist_x.steps(v, inv_letters(wx), sink) > r:
            return False
        if self.dist_y is not None and self.dist_y.steps(v, inv_letters(wy), sink) > r:
            return False
        return True

    def count(self, v: str, wx: tuple, wy: tuple, r: int) -> int:
        if r == 0:
            return 1 if v == self.A.sink and not wx and not wy else 0
        key = (v, wx, wy, r)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        total = 0
        if self.alive(v, wx, wy, r):
            for _, t, lx, ly in self.out[v]:
                total += self.count(t, mul_letters(wx, lx), mul_letters(wy, ly), r - 1)
        self.memo[key] = total
        if len(self.memo) > self.budget:
            raise BudgetExceeded("path-count memo", len(self.memo), self.budget)
        return total


def _deep(n: int):
    limit = sys.getrecursionlimit()
    if n + 100 > limit:
        sys.setrecursionlimit(n + 200)
    return limit


def count_flat_paths(A: LabeledAutomaton, n: int, budget: int = DEFAULT_TERM_CAP, prune: str = "stack") -> int:
    """Number of accepting paths of length exactly ``n``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    limit = _deep(n)
    try:
        return _PathCounter(A, budget, prune).count(A.source, (), (), n)
    finally:
        sys.setrecursionlimit(limit)


def accepting_paths(A: LabeledAutomaton, n: int, budget: int = DEFAULT_TERM_CAP) -> Iterator[PathCertificate]:
    """Yield every accepting path of length ``n`` with its running products."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    limit = _deep(n)
    pc = _PathCounter(A, budget)
    try:
        if not pc.count(A.source, (), (), n):
            return
        stack: list[tuple[int, tuple, tuple]] = []

        def walk(v, wx, wy, r):
            if r == 0:
                yield PathCertificate(
                    tuple(A.edges[i] for i, _, _ in stack),
                    tuple(PairElement(ReducedWord(A.X, x), ReducedWord(A.Y, y)) for _, x, y in stack),
                )
                return
            for i, t, lx, ly in pc.out[v]:
                nx, ny = mul_letters(wx, lx), mul_letters(wy, ly)
                if pc.count(t, nx, ny, r - 1):
                    stack.append((i, nx, ny))
                    yield from walk(t, nx, ny, r - 1)
                    stack.pop()

        yield from walk(A.source, (), (), n)
    finally:
        sys.setrecursionlimit(limit)


# ---------------------------------------------------------------------------
# closed form for gamma


def _sum_floor_log2(k: int) -> int:
    """sum_{i=1}^{k} floor(log2 i), in O(1)."""
    if k < 1:
        return 0
    m = k.bit_length() - 1
    return (k + 1) * m - (1 << (m + 1)) + 2


def length_formula(k: int, j: int) -> int:
    """Length of the accepting path with ``k`` trips round the first loop, exiting at digit ``j``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 1 <= j <= k.bit_length():
        raise ValueError(f"digit position {j} out of range 1..{k.bit_length()} for k={k}")
    return j + 6 * k + 2 * _sum_floor_log2(k)


def locate(n: int) -> tuple[int, int] | None:
    """The unique admissible (k, j) with L(k, j) = n, ignoring the digit test.

    ``L(k, 1)`` is strictly increasing and at least ``6k + 1``, so the largest
    ``k`` with ``L(k, 1) <= n`` is found by bisection on ``[1, n // 6]``.
    """
    if n < 7:
        return None
    lo, hi = 1, n // 6
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if length_formula(mid, 1) <= n:
            lo = mid
        else:
            hi = mid - 1
    k = lo
    j = n - length_formula(k, 1) + 1
    if j > k.bit_length():
        return None
    return k, j


def b_closed_form(n: int) -> int:
    """``b_n`` from the closed form: 1 iff n = L(k, j) and digit j of k is 1.

    Digit ``j`` counts from the most significant end: ``j`` is the number of
    digits still on the X stack when the path leaves for the sink, so ``j = 1``
    is the leading bit.  The path DFS fixes this order (``b_15 = 1``,
    ``b_16 = 0`` for ``k = 2``).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    hit = locate(n)
    if hit is None:
        return 0
    k, j = hit
    return (k >> (k.bit_length() - j)) & 1


def b_word(N: int) -> str:
    """``b_1 b_2 ... b_N`` as a '0'/'1' string."""
    return "".join("1" if b_closed_form(n) else "0" for n in range(1, N + 1))


def digit_window(k: int) -> str:
    """``b_{L(k,1)} ... b_{L(k,J)}`` with J the bit length of k: ``k`` in binary."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return "".join(str(b_closed_form(length_formula(k, j))) for j in range(1, k.bit_length() + 1))


def load_automaton(path: str) -> LabeledAutomaton:
    with open(path) as fh:
        return LabeledAutomaton.parse(fh.read())
