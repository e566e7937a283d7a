"""Integer group ring of X x Y (two commuting free groups).

Two ways to get at ``[g] u^n``:

* :func:`coeff_at_identity_pow` multiplies sparse ring elements; exact but
  the support grows like ``|supp u|^n``.
* :func:`pruned_identity_count` runs a memoized depth-first search over
  reduced partial products and discards any state whose distance to the
  target cannot be covered in the remaining steps.

Framed search
-------------
A generator set is *framed* by a set of state letters ``{sigma_v}`` of X when
every generator has X-part ``sigma_a^-1 w sigma_b`` with ``w`` free of state
letters; such a generator is an edge ``a -> b`` of a labeled graph.  In a
product with a *mismatched* junction (``b_t != a_{t+1}``) the letter
``sigma_{b_t}`` can only cancel across a proper consecutive sub-product whose
X-part is trivial, and a shortest X-trivial product is a closed walk of the
graph with trivial X-label.  So when no such closed walk exists (checked by
:func:`frame_certificate`), only matched sequences can reach the target and
the search may follow graph edges only.  Modular mode also excuses closed
walks through generators whose weights multiply to zero pairwise, provided
the target's X-part is trivial: removing an X-trivial consecutive block from
an X-trivial product leaves an X-trivial product, and one of the two pieces
avoids those generators.
"""

from __future__ import annotations

import os
import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ._pushdown import StackDistance
from .errors import AlphabetMismatch, BudgetExceeded, ModulusMismatch, PrecurseError
from .words import (
    X_ALPHABET,
    Y_ALPHABET,
    Alphabet,
    PairElement,
    ReducedWord,
    inv_letters,
    mul_letters,
)

DEFAULT_TERM_CAP = int(os.environ.get("PRECURSE_BUDGET", 10**7))

Key = tuple[tuple[int, ...], tuple[int, ...]]


class RingElement:
    """Finitely supported map ``PairElement -> int``, optionally reduced mod ``modulus``."""

    __slots__ = ("X", "Y", "modulus", "_terms")

    def __init__(
        self,
        terms: Mapping[PairElement, int] | Iterable[tuple[PairElement, int]] = (),
        modulus: int | None = None,
        X: Alphabet = X_ALPHABET,
        Y: Alphabet = Y_ALPHABET,
    ):
        if modulus is not None and modulus < 2:
            raise ValueError("modulus must be at least 2")
        self.X, self.Y, self.modulus = X, Y, modulus
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Key, int] = {}
        for g, c in items:
            if g.x.alphabet != X or g.y.alphabet != Y:
                raise AlphabetMismatch("term is not over the ring's alphabets")
            acc[g.key] = acc.get(g.key, 0) + c
        self._terms = _clean(acc, modulus)

    @classmethod
    def _raw(cls, terms: dict[Key, int], modulus, X, Y) -> "RingElement":
        r = cls.__new__(cls)
        r.X, r.Y, r.modulus, r._terms = X, Y, modulus, terms
        return r

    @classmethod
    def one(cls, modulus: int | None = None, X: Alphabet = X_ALPHABET, Y: Alphabet = Y_ALPHABET):
        return cls._raw(_clean({((), ()): 1}, modulus), modulus, X, Y)

    @property
    def terms(self) -> dict[PairElement, int]:
        return {self._element(k): c for k, c in self._terms.items()}

    def _element(self, key: Key) -> PairElement:
        return PairElement(ReducedWord(self.X, key[0]), ReducedWord(self.Y, key[1]))

    def __getitem__(self, g: PairElement) -> int:
        return self._terms.get(g.key, 0)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return (self.X, self.Y, self.modulus, self._terms) == (other.X, other.Y, other.modulus, other._terms)

    def __repr__(self):
        body = " + ".join(f"{c}*[{self._element(k)}]" for k, c in sorted(self._terms.items()))
        mod = f" (mod {self.modulus})" if self.modulus else ""
        return f"RingElement({body or '0'}){mod}"

    def _check(self, other: "RingElement"):
        if (self.X, self.Y) != (other.X, other.Y):
            raise AlphabetMismatch("ring elements over different alphabets")
        if self.modulus != other.modulus:
            raise ModulusMismatch(f"modulus {self.modulus} vs {other.modulus}")

    def __add__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0) + c
        return RingElement._raw(_clean(acc, self.modulus), self.modulus, self.X, self.Y)

    def __mul__(self, other: "RingElement") -> "RingElement":
        return ring_mul(self, other)

    def scale(self, c: int) -> "RingElement":
        acc = {k: c * v for k, v in self._terms.items()}
        return RingElement._raw(_clean(acc, self.modulus), self.modulus, self.X, self.Y)

    def reduce_mod(self, m: int) -> "RingElement":
        return RingElement._raw(_clean(dict(self._terms), m), m, self.X, self.Y)

    def weighted_support(self) -> list[tuple[PairElement, int]]:
        return [(self._element(k), c) for k, c in sorted(self._terms.items())]


def _clean(acc: dict[Key, int], modulus: int | None) -> dict[Key, int]:
    if modulus is None:
        return {k: c for k, c in acc.items() if c}
    return {k: c % modulus for k, c in acc.items() if c % modulus}


def ring_mul(a: RingElement, b: RingElement, cap: int = DEFAULT_TERM_CAP) -> RingElement:
    a._check(b)
    acc: dict[Key, int] = {}
    for (ax, ay), ca in a._terms.items():
        for (bx, by), cb in b._terms.items():
            k = (mul_letters(ax, bx), mul_letters(ay, by))
            acc[k] = acc.get(k, 0) + ca * cb
        if len(acc) > cap:
            raise BudgetExceeded("ring_mul support", len(acc), cap)
    return RingElement._raw(_clean(acc, a.modulus), a.modulus, a.X, a.Y)


def coeff_at_identity_pow(u: RingElement, n: int, cap: int = DEFAULT_TERM_CAP) -> int:
    """``[1] u^n``: build ``u^ceil(n/2)`` and ``u^floor(n/2)``, then pair ``g`` with ``g^-1``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    m = u.modulus
    if n == 0:
        return 1 % m if m else 1
    lo = RingElement.one(m, u.X, u.Y)
    for _ in range(n // 2):
        lo = ring_mul(lo, u, cap)
    hi = ring_mul(lo, u, cap) if n % 2 else lo
    total = 0
    for (gx, gy), c in hi._terms.items():
        d = lo._terms.get((inv_letters(gx), inv_letters(gy)))
        if d:
            total += c * d
    return total % m if m else total


# ---------------------------------------------------------------------------
# pruned search


@dataclass
class FrameCertificate:
    ok: bool
    reason: str
    # a closed walk with trivial X-label that blocks the certificate, as generator indices
    witness: list[int] = field(default_factory=list)
    excused: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class _Edge:
    index: int
    a: int
    b: int
    w: tuple[int, ...]


def _frame_edges(gens: Sequence[tuple[Key, int]], frame: frozenset[int]) -> list[_Edge]:
    edges = []
    for i, ((gx, _), _) in enumerate(gens):
        if len(gx) < 2 or gx[0] >= 0 or -gx[0] not in frame or gx[-1] <= 0 or gx[-1] not in frame:
            raise PrecurseError(f"generator {i} is not framed by the state letters")
        w = gx[1:-1]
        if any(abs(c) in frame for c in w):
            raise PrecurseError(f"generator {i} has a state letter inside its label")
        edges.append(_Edge(i, -gx[0], gx[-1], w))
    return edges


def _x_trivial_closed_walk(edges: list[_Edge], max_len: int) -> list[int] | None:
    """A closed walk of length <= max_len with trivial X-label, or None."""
    if max_len < 1 or not edges:
        return None
    lam = max(len(e.w) for e in edges)
    out: dict[int, list[_Edge]] = {}
    for e in edges:
        out.setdefault(e.a, []).append(e)
    for start in sorted(out):
        seen: set = set()
        path: list[int] = []

        def dfs(v, omega, depth):
            for e in out.get(v, ()):
                om = mul_letters(omega, e.w)
                d = depth + 1
                if e.b == start and not om:
                    path.append(e.index)
                    return True
                if d >= max_len or len(om) > lam * (max_len - d):
                    continue
                key = (e.b, om, d)
                if key in seen:
                    continue
                seen.add(key)
                path.append(e.index)
                if dfs(e.b, om, d):
                    return True
                path.pop()
            return False

        if dfs(start, (), 0):
            return path
    return None


def frame_certificate(
    gens: Sequence[tuple[PairElement, int]],
    frame: Iterable[str | int],
    n: int,
    target: PairElement | None = None,
    modulus: int | None = None,
) -> FrameCertificate:
    """Decide whether edge-following search is exact for these generators at length ``n``."""
    raw, _ = _normalize(gens, modulus)
    X = gens[0][0].x.alphabet if gens else X_ALPHABET
    fr = frozenset(abs(X.letter(s)) if isinstance(s, str) else abs(s) for s in frame)
    tx = target.x.letters if target is not None else ()
    if sum(1 for c in tx if c > 0 and c in fr) > 1:
        return FrameCertificate(False, "target X-part has more than one positive state letter")
    edges = _frame_edges(raw, fr)
    excused: list[int] = []
    if modulus is not None and not tx:
        excused = _nilpotent_pool(raw, modulus)
        edges = [e for e in edges if e.index not in excused]
    bound = n - 1
    if edges and all(len(e.w) <= 1 for e in edges):
        # shortest nonempty X-trivial closed walk: one edge, then a path back cancelling it
        verts = sorted({e.a for e in edges} | {e.b for e in edges})
        dist = StackDistance(verts, [(e.a, e.b, e.w) for e in edges])
        shortest = min(1 + dist.steps(e.b, inv_letters(e.w), e.a) for e in edges)
        bound = shortest if shortest <= bound else 0
    walk = _x_trivial_closed_walk(edges, bound)
    if walk is not None:
        return FrameCertificate(False, f"closed walk of length {len(walk)} with trivial X-label", walk, excused)
    return FrameCertificate(True, f"no X-trivial closed walk of length <= {n - 1}", [], excused)


def _nilpotent_pool(raw, modulus) -> list[int]:
    # generators whose weights multiply to 0 mod m with every pool member, itself included
    pool = [i for i, (_, w) in enumerate(raw) if (w * w) % modulus == 0]
    while True:
        keep = [i for i in pool if all((raw[i][1] * raw[j][1]) % modulus == 0 for j in pool)]
        if keep == pool:
            return pool
        pool = keep


def _normalize(gens, modulus) -> tuple[list[tuple[Key, int]], list[int]]:
    acc: dict[Key, int] = {}
    order: list[Key] = []
    for g, w in gens:
        if g.key not in acc:
            order.append(g.key)
            acc[g.key] = 0
        acc[g.key] += w
    raw = []
    for k in order:
        w = acc[k] % modulus if modulus else acc[k]
        if w:
            raw.append((k, w))
    return raw, [w for _, w in raw]


def _letter_caps(words: list[tuple[int, ...]], extra_class: frozenset[int] = frozenset()):
    total = max((len(w) for w in words), default=0)
    per: dict[int, int] = {}
    cls = 0
    for w in words:
        cnt = Counter(abs(c) for c in w)
        for a, k in cnt.items():
            per[a] = max(per.get(a, 0), k)
        if extra_class:
            cls = max(cls, sum(1 for c in w if abs(c) not in extra_class))
    return total, per, cls


def pruned_identity_count(
    gens: Sequence[tuple[PairElement, int]],
    n: int,
    target: PairElement | None = None,
    modulus: int | None = None,
    budget: int = DEFAULT_TERM_CAP,
    frame: Iterable[str | int] | None = None,
) -> int:
    """Weighted number of length-``n`` products of ``gens`` equal to ``target`` (default 1)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    raw, _ = _normalize(gens, modulus)
    X = gens[0][0].x.alphabet if gens else X_ALPHABET
    tx, ty = target.key if target is not None else ((), ())
    if n == 0:
        hit = 1 if not tx and not ty else 0
        return hit % modulus if modulus else hit

    fr: frozenset[int] = frozenset()
    edge_of: list[tuple[int, int]] | None = None
    dist_x = dist_y = None
    if frame is not None:
        fr = frozenset(abs(X.letter(s)) if isinstance(s, str) else abs(s) for s in frame)
        cert = frame_certificate(gens, fr, n, target, modulus)
        if not cert.ok:
            raise PrecurseError(f"framed search not certified: {cert.reason}")
        edges = _frame_edges(raw, fr)
        edge_of = [(e.a, e.b) for e in edges]
        framed_target = not tx or (len(tx) >= 2 and -tx[0] in fr and tx[-1] in fr)
        if framed_target and all(len(e.w) <= 1 for e in edges) and all(len(k[1]) <= 1 for k, _ in raw):
            verts = sorted({e.a for e in edges} | {e.b for e in edges} | ({-tx[0], tx[-1]} if tx else set()))
            dist_x = StackDistance(verts, [(e.a, e.b, e.w) for e in edges])
            dist_y = StackDistance(verts, [(e.a, e.b, raw[e.index][0][1]) for e in edges])

    lam_x, per_x, cls_x = _letter_caps([k[0] for k, _ in raw], fr)
    lam_y, per_y, _ = _letter_caps([k[1] for k, _ in raw])
    gen_list = [(k[0], k[1], w, edge_of[i] if edge_of else (0, 0)) for i, (k, w) in enumerate(raw)]

    def feasible(px, py, r):
        # the remaining r factors must multiply to Q = P^-1 T
        qx = mul_letters(inv_letters(px), tx)
        if len(qx) > lam_x * r:
            return False
        qy = mul_letters(inv_letters(py), ty)
        if len(qy) > lam_y * r:
            return False
        if qx:
            cx = Counter(abs(c) for c in qx)
            for a, k in cx.items():
                if k > per_x.get(a, 0) * r:
                    return False
            if fr and sum(k for a, k in cx.items() if a not in fr) > cls_x * r:
                return False
        if qy:
            for a, k in Counter(abs(c) for c in qy).items():
                if k > per_y.get(a, 0) * r:
                    return False
        return True

    memo: dict = {}
    limit = sys.getrecursionlimit()
    if n + 50 > limit:
        sys.setrecursionlimit(n + 100)
    tau_x = tx[1:-1] if tx else ()

    def reachable(px, py, a1, v, r):
        # matched walks only: X-part is sigma_a1^-1 omega sigma_v
        if tx:
            if a1 != -tx[0]:
                return False
            end = tx[-1]
        else:
            end = a1
        omega = px[1:-1] if px else ()
        if dist_x.steps(v, mul_letters(inv_letters(omega), tau_x), end) > r:
            return False
        return dist_y.steps(v, mul_letters(inv_letters(py), ty), end) <= r

    def count(px, py, a1, v, r):
        key = (px, py, a1, v, r)
        hit = memo.get(key)
        if hit is not None:
            return hit
        total = 0
        for gx, gy, w, (a, b) in gen_list:
            if edge_of is not None and v and a != v:
                continue
            nx = mul_letters(px, gx)
            ny = mul_letters(py, gy)
            if r == 1:
                if nx == tx and ny == ty:
                    total += w
                continue
            if not feasible(nx, ny, r - 1):
                continue
            start = a1 or a
            if dist_x is not None and not reachable(nx, ny, start, b, r - 1):
                continue
            c = count(nx, ny, start, b, r - 1)
            if c:
                total += w * c
        if modulus:
            total %= modulus
        memo[key] = total
        if len(memo) > budget:
            raise BudgetExceeded("pruned search memo", len(memo), budget)
        return total

    try:
        if not feasible((), (), n):
            return 0
        return count((), (), 0, 0, n)
    finally:
        sys.setrecursionlimit(limit)
