"""P-recursive sequences: evaluation, guessing, parity words and forbidden factors.

A recurrence of order ``k`` is a list of integer polynomials ``q_0..q_k`` with

    q_0(n) a_n + q_1(n) a_{n-1} + ... + q_k(n) a_{n-k} = 0,

each polynomial stored as its coefficient vector in the power basis
(``[c0, c1, ...]`` means ``c0 + c1 n + ...``).  Sequences are 1-indexed by
default.

All linear algebra is over Python integers; nothing here touches floats.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import InsufficientTerms, NonIntegralTerm, NotInvertible, PrecurseError, ZeroLeadingCoefficient

HELD_OUT = 10


def poly_eval(c: Sequence[int], n: int) -> int:
    acc = 0
    for a in reversed(c):
        acc = acc * n + a
    return acc


def _trim(c: Sequence[int]) -> list[int]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


@dataclass(frozen=True)
class Recurrence:
    polys: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        polys = [tuple(_trim(p)) for p in self.polys]
        while len(polys) > 1 and not polys[-1]:
            polys.pop()
        if not polys or not polys[0]:
            raise PrecurseError("q_0 must not be identically zero")
        if len(polys) < 2:
            raise PrecurseError("recurrence needs order at least 1")
        object.__setattr__(self, "polys", tuple(polys))

    @classmethod
    def of(cls, *polys: Sequence[int]) -> "Recurrence":
        return cls(tuple(tuple(p) for p in polys))

    @property
    def order(self) -> int:
        return len(self.polys) - 1

    @property
    def degree(self) -> int:
        return max(len(p) for p in self.polys) - 1

    def q(self, i: int, n: int) -> int:
        return poly_eval(self.polys[i], n)

    def residual(self, terms: Sequence, n: int, start: int = 1) -> int | Fraction:
        """Left side of the recurrence at index ``n``."""
        return sum(self.q(i, n) * terms[n - i - start] for i in range(self.order + 1))

    def normalized(self) -> "Recurrence":
        """Divide out the content; make the top coefficient of ``q_0`` positive."""
        flat = [c for p in self.polys for c in p]
        g = 0
        for c in flat:
            g = gcd(g, c)
        sign = -1 if self.polys[0][-1] < 0 else 1
        return Recurrence(tuple(tuple(sign * c // g for c in p) for p in self.polys))

    def to_json(self) -> str:
        return json.dumps({"order": self.order, "polys": [[str(c) for c in p] for p in self.polys]})

    @classmethod
    def from_json(cls, text: str) -> "Recurrence":
        obj = json.loads(text)
        rec = cls(tuple(tuple(int(c) for c in p) for p in obj["polys"]))
        if "order" in obj and int(obj["order"]) != rec.order:
            raise PrecurseError(f"order field {obj['order']} disagrees with {rec.order} polynomials")
        return rec

    def __str__(self):
        def poly(c):
            parts = []
            for j, a in enumerate(c):
                if a:
                    parts.append(f"{a}" + ("" if j == 0 else "*n" if j == 1 else f"*n^{j}"))
            return "(" + " + ".join(parts) + ")" if parts else "0"

        return " + ".join(f"{poly(p)}*a(n-{i})" if i else f"{poly(p)}*a(n)" for i, p in enumerate(self.polys)) + " = 0"


@dataclass
class SequencePrefix:
    terms: list
    start: int = 1

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, n: int):
        return self.terms[n - self.start]

    @property
    def indices(self) -> range:
        return range(self.start, self.start + len(self.terms))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "value"])
        for i, v in zip(self.indices, self.terms):
            w.writerow([i, v])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SequencePrefix":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if rows and rows[0][0].strip().lower() == "index":
            rows = rows[1:]
        if not rows:
            return cls([], 1)
        idx = [int(r[0]) for r in rows]
        if idx != list(range(idx[0], idx[0] + len(idx))):
            raise PrecurseError("sequence indices must be contiguous")
        vals = [Fraction(r[1]) for r in rows]
        vals = [int(v) if v.denominator == 1 else v for v in vals]
        return cls(vals, idx[0])


def eval_recurrence(
    r: Recurrence,
    seeds: SequencePrefix,
    N: int,
    mode: str = "integer",
    modulus: int | None = None,
) -> SequencePrefix:
    """Extend ``seeds`` to ``N`` terms.

    ``mode`` is ``"integer"`` (exact division required), ``"rational"``, or
    ``"modular"`` (needs ``modulus``; ``q_0(n)`` must be a unit mod it).
    """
    k = r.order
    if len(seeds) < k:
        raise InsufficientTerms(f"order {k} recurrence needs {k} seeds, got {len(seeds)}")
    if mode not in ("integer", "rational", "modular"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "modular" and (modulus is None or modulus < 2):
        raise ValueError("modular mode needs a modulus >= 2")
    terms = list(seeds.terms[:N])
    if mode == "modular":
        terms = [t % modulus for t in terms]
    elif mode == "rational":
        terms = [Fraction(t) for t in terms]
    polys = r.polys
    n = seeds.start + len(terms)
    while len(terms) < N:
        q0 = poly_eval(polys[0], n)
        if q0 == 0:
            raise ZeroLeadingCoefficient(f"q_0({n}) = 0")
        rhs = 0
        L = len(terms)
        for i in range(1, k + 1):
            rhs -= poly_eval(polys[i], n) * terms[L - i]
        if mode == "integer":
            a, rem = divmod(rhs, q0)
            if rem:
                raise NonIntegralTerm(f"a_{n} = {rhs}/{q0} is not an integer")
        elif mode == "rational":
            a = rhs / q0
        else:
            try:
                inv = pow(q0, -1, modulus)
            except ValueError:
                raise NotInvertible(f"q_0({n}) = {q0} is not a unit mod {modulus}") from None
            a = rhs * inv % modulus
        terms.append(a)
        n += 1
    return SequencePrefix(terms, seeds.start)


# ---------------------------------------------------------------------------
# guessing


def _nullspace(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Integer basis of the right nullspace, by fraction-free (Bareiss) elimination."""
    A = [list(r) for r in rows]
    pivots: list[int] = []
    prev = 1
    rank = 0
    for col in range(ncols):
        p = next((i for i in range(rank, len(A)) if A[i][col]), None)
        if p is None:
            continue
        A[rank], A[p] = A[p], A[rank]
        piv_row = A[rank]
        pv = piv_row[col]
        for i in range(rank + 1, len(A)):
            Ai = A[i]
            f = Ai[col]
            if f == 0:
                # the Bareiss update still rescales the row
                for j in range(col + 1, ncols):
                    Ai[j] = Ai[j] * pv // prev
            else:
                for j in range(col + 1, ncols):
                    Ai[j] = (Ai[j] * pv - f * piv_row[j]) // prev
            Ai[col] = 0
        prev = pv
        pivots.append(col)
        rank += 1
        if rank == len(A):
            break
    A = A[:rank]
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for r in range(rank - 1, -1, -1):
            c = pivots[r]
            s = sum(A[r][j] * x[j] for j in range(c + 1, ncols))
            a = A[r][c]
            if s % a:
                g = a // gcd(a, s)
                x = [v * g for v in x]
                s *= g
            x[c] = -s // a
        g = 0
        for v in x:
            g = gcd(g, v)
        basis.append([v // g for v in x])
    return basis


def _fit(terms: Sequence, start: int, k: int, d: int, held: int) -> Recurrence | None:
    width = d + 1
    ncols = (k + 1) * width
    last = start + len(terms) - 1 - held
    rows = []
    for n in range(start + k, last + 1):
        row = []
        for i in range(k + 1):
            a = terms[n - i - start]
            p = 1
            for _ in range(width):
                row.append(a * p)
                p *= n
        rows.append(row)
    # clear denominators for rational data
    if any(isinstance(v, Fraction) for r in rows for v in r):
        rows = [_integral_row(r) for r in rows]
    basis = _nullspace(rows, ncols)
    if len(basis) > 1:
        # basis vectors alone can have q_0 = 0 or no tail; a generic
        # combination of them cannot, unless every solution does
        for weights in ([1] * len(basis), list(range(1, len(basis) + 1))):
            basis.append([sum(w * v[j] for w, v in zip(weights, basis)) for j in range(ncols)])
    candidates = []
    for vec in basis:
        polys = tuple(tuple(vec[i * width : (i + 1) * width]) for i in range(k + 1))
        if not any(polys[0]):
            continue
        try:
            rec = Recurrence(polys).normalized()
        except PrecurseError:
            continue
        candidates.append(rec)
    candidates.sort(key=lambda r: (max(abs(c) for p in r.polys for c in p), r.polys))
    for rec in candidates:
        if all(rec.residual(terms, n, start) == 0 for n in range(start + rec.order, start + len(terms))):
            return rec
    return None


def _integral_row(row):
    den = 1
    for v in row:
        if isinstance(v, Fraction):
            den = den * v.denominator // gcd(den, v.denominator)
    return [int(v * den) for v in row]


def terms_needed(k: int, d: int, held: int = HELD_OUT) -> int:
    return (k + 1) * (d + 1) + k + held


def guess_recurrence(
    seq: SequencePrefix | Sequence,
    max_order: int,
    max_degree: int,
    held: int = HELD_OUT,
) -> Recurrence | None:
    """Smallest recurrence (order, then degree, then coefficient size) fitting ``seq``.

    The last ``held`` terms are left out of the linear system and used only
    to confirm the fit; a returned recurrence annihilates every term.  A
    (order, degree) cell with too few terms for its unknowns plus the held-out
    margin is skipped, and :class:`InsufficientTerms` is raised only when no
    cell succeeds and some were skipped.
    """
    if not isinstance(seq, SequencePrefix):
        seq = SequencePrefix(list(seq))
    if max_order < 1 or max_degree < 0:
        raise ValueError("need max_order >= 1 and max_degree >= 0")
    skipped = []
    for k in range(1, max_order + 1):
        for d in range(max_degree + 1):
            if len(seq) < terms_needed(k, d, held):
                skipped.append((k, d))
                continue
            rec = _fit(seq.terms, seq.start, k, d, held)
            if rec is not None:
                return rec
    if skipped:
        k, d = skipped[0]
        raise InsufficientTerms(
            f"{len(seq)} terms; order {k} degree {d} needs {terms_needed(k, d, held)} ({held} held out)"
        )
    return None


# ---------------------------------------------------------------------------
# parity words and forbidden factors


def eta(n: int) -> int:
    """2-adic valuation."""
    if n == 0:
        raise ValueError("eta(0) is undefined")
    n = abs(n)
    return (n & -n).bit_length() - 1


@dataclass(frozen=True)
class BitWord:
    bits: str
    start: int = 1

    def __post_init__(self):
        if self.bits.strip("01"):
            raise ValueError("bits must be '0' or '1'")

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return self.bits


@dataclass(frozen=True)
class ForbiddenWord:
    ell: int
    m: int
    d: int
    v: BitWord


def forbidden_word(r: Recurrence, search: int = 10**6) -> ForbiddenWord:
    """A factor that never occurs in the parity word of an integer solution of ``r``.

    Smallest ``l > 0`` with every ``q_i(l) != 0`` (identically zero ``q_i`` are skipped); smallest ``m`` with
    ``2^m > k`` and ``m > eta(q_i(l))`` for all i; smallest ``d > 0`` of least
    valuation ``eta(q_d(l))``; then ``v = (0^(k-d) 1 0^k 1 0^(d-1))^(2^m)``.
    """
    k = r.order
    # an identically zero q_i contributes no term, so it has no valuation to beat
    live = [i for i in range(k + 1) if any(r.polys[i])]
    ell = next((l for l in range(1, search) if all(r.q(i, l) for i in live)), None)
    if ell is None:
        raise PrecurseError("no evaluation point with all coefficients nonzero")
    vals = {i: eta(r.q(i, ell)) for i in live}
    m = 0
    while (1 << m) <= k or any(m <= e for e in vals.values()):
        m += 1
    d = min((i for i in live if i), key=lambda i: (vals[i], i))
    block = "0" * (k - d) + "1" + "0" * k + "1" + "0" * (d - 1)
    return ForbiddenWord(ell, m, d, BitWord(block * (1 << m)))


def find_subword(w: BitWord | str, v: BitWord | str) -> int | None:
    """1-indexed position of the first occurrence of ``v`` in ``w``."""
    i = str(w).find(str(v))
    return None if i < 0 else i + 1


def contains_subword(w: BitWord | str, v: BitWord | str) -> bool:
    return find_subword(w, v) is not None


def parity_word(terms: SequencePrefix | Iterable[int], halve: bool = False) -> BitWord:
    """``a_n mod 2``; with ``halve``, ``(a_n / 2) mod 2`` and every term must be even."""
    start = 1
    if isinstance(terms, SequencePrefix):
        start, terms = terms.start, terms.terms
    out = []
    for t in terms:
        if halve:
            if t % 2:
                raise ValueError(f"odd term {t} in halving mode")
            t //= 2
        out.append("1" if t % 2 else "0")
    return BitWord("".join(out), start)


MAX_FACTOR_LEN = 24


def subword_complexity(w: BitWord | str, n: int) -> int:
    """Distinct length-``n`` factors of the prefix (a lower bound for the infinite word)."""
    s = str(w)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_FACTOR_LEN:
        raise ValueError(f"factor length capped at {MAX_FACTOR_LEN}")
    if len(s) < n:
        raise ValueError(f"prefix of length {len(s)} is shorter than {n}")
    if n == 0:
        return 1
    seen = set()
    for i in range(len(s) - n + 1):
        seen.add(s[i : i + n])
        if len(seen) == 1 << n:
            break
    return len(seen)


# ---------------------------------------------------------------------------
# fixtures


@dataclass(frozen=True)
class Fixture:
    name: str
    recurrence: Recurrence
    seeds: SequencePrefix = field(hash=False)
    # mode that reproduces the sequence's parity most cheaply
    parity_mode: str = "integer"


CATALAN = Fixture("catalan", Recurrence.of((1, 1), (2, -4)), SequencePrefix([1], 1), "valuation")
FIBONACCI = Fixture("fibonacci", Recurrence.of((1,), (-1,), (-1,)), SequencePrefix([1, 1], 1), "modular")
# a_n = (2n-1) a_{n-1} - (n-1)(n-2) a_{n-2}
FRAGMENTED = Fixture(
    "fragmented", Recurrence.of((1,), (1, -2), (2, -3, 1)), SequencePrefix([1, 3], 1), "modular"
)
FIXTURES = {f.name: f for f in (CATALAN, FIBONACCI, FRAGMENTED)}


def first_order_parity(r: Recurrence, seeds: SequencePrefix, N: int) -> BitWord:
    """Parity word of an order-1 solution, tracking only 2-adic valuations.

    ``a_n = -q_1(n) a_{n-1} / q_0(n)``, so ``eta(a_n)`` changes by
    ``eta(q_1(n)) - eta(q_0(n))`` and ``a_n`` is odd exactly when it reaches 0.
    The sequence must stay nonzero and integral (not checked here; use
    :func:`eval_recurrence` for that).
    """
    if r.order != 1 or len(seeds) < 1 or not seeds.terms[0]:
        raise ValueError("needs an order-1 recurrence and a nonzero seed")
    e = eta(int(seeds.terms[0]))
    bits = ["1" if e == 0 else "0"]
    n = seeds.start + 1
    while len(bits) < N:
        q0, q1 = r.q(0, n), r.q(1, n)
        if q0 == 0:
            raise ZeroLeadingCoefficient(f"q_0({n}) = 0")
        if q1 == 0:
            raise ValueError(f"a_{n} = 0 has no valuation")
        e += eta(q1) - eta(q0)
        bits.append("1" if e == 0 else "0")
        n += 1
    return BitWord("".join(bits[:N]), seeds.start)


def parity_prefix(fx: Fixture, N: int) -> BitWord:
    if fx.parity_mode == "valuation":
        return first_order_parity(fx.recurrence, fx.seeds, N)
    if fx.parity_mode == "modular":
        return parity_word(eval_recurrence(fx.recurrence, fx.seeds, N, "modular", 2))
    return parity_word(eval_recurrence(fx.recurrence, fx.seeds, N))
