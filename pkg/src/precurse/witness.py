"""The 19-term witness set S, the element u, and matrix realizations.

``S`` lives in ``F_11 x F_3`` with ``X = s1..s8 x 0x 1x`` and ``Y = y 0y 1y``.
Each ``z`` is ``s_i^-1 r s_j`` for an edge ``s_i -r-> s_j`` of the bundled
graph (see :func:`precurse.automaton.gamma`), so products of ``z``'s that
reach ``s1^-1 s8`` are accepting paths, and

    u = 2 s8^-1 s1 + sum(z)

has ``[1] u^(2n+1) = 2 (2n+1) b_2n (mod 4)``: the doubled closing term must be
used exactly once, in one of ``2n+1`` cyclic positions.

Matrix side: ``F_2`` sits in SL(2, Z) as the Sanov subgroup, ``F_l`` sits in
``F_2`` through the free basis ``a^i b a^-i``, and the two factors go into the
diagonal blocks of SL(4, Z).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .automaton import LabeledAutomaton, b_closed_form, count_flat_paths, gamma
from .errors import BudgetExceeded, PrecurseError
from .ring import DEFAULT_TERM_CAP, RingElement, coeff_at_identity_pow, pruned_identity_count
from .words import (
    X_ALPHABET,
    Y_ALPHABET,
    Alphabet,
    PairElement,
    ReducedWord,
    free_reduce,
    inv_letters,
    mul_letters,
)

FRAME = tuple(f"s{i}" for i in range(1, 9))

# embedded copy of data/witness_s.txt; load_witness_set() checks they agree
_Z_TEXT = (
    "s1^-1 x y s1",
    "s1^-1 s2",
    "s2^-1 1x^-1 0y s2",
    "s2^-1 0x^-1 1y s3",
    "s3^-1 1x^-1 1y s3",
    "s3^-1 0x^-1 0y s3",
    "s3^-1 x^-1 s4",
    "s2^-1 1y x^-1 s4",
    "s4^-1 1y^-1 1x s4",
    "s4^-1 0y^-1 0x s4",
    "s4^-1 y^-1 s5",
    "s5^-1 s2",
    "s5^-1 s6",
    "s6^-1 1x^-1 s6",
    "s6^-1 0x^-1 s6",
    "s6^-1 1x^-1 s8",
    "s7^-1 s8",
    "s8^-1 1x^-1 s7",
    "s8^-1 0x^-1 s7",
)
SPECIAL_TEXT = "s8^-1 s1"
TARGET_TEXT = "s1^-1 s8"


@dataclass(frozen=True)
class WitnessSet:
    z: tuple[PairElement, ...]
    special: PairElement
    special_weight: int = 2

    def __post_init__(self):
        if len(set(self.z)) != len(self.z):
            raise PrecurseError("witness terms must be distinct")

    def weighted(self, with_special: bool = False) -> list[tuple[PairElement, int]]:
        gens = [(z, 1) for z in self.z]
        if with_special:
            gens.append((self.special, self.special_weight))
        return gens


def _read_fixture() -> list[str]:
    text = resources.files("precurse").joinpath("data/witness_s.txt").read_text()
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def load_witness_set() -> WitnessSet:
    lines = _read_fixture()
    if tuple(lines) != _Z_TEXT:
        raise PrecurseError("witness fixture file differs from the embedded copy")
    z = tuple(PairElement.parse(t) for t in lines)
    return WitnessSet(z, PairElement.parse(SPECIAL_TEXT))


def edge_elements(A: LabeledAutomaton | None = None, X: Alphabet = X_ALPHABET) -> list[PairElement]:
    """``s_i^-1 r s_j`` for each edge ``s_i -r-> s_j``, in edge order, over the big alphabet."""
    A = A or gamma()
    out = []
    for e in A.edges:
        rx = [X.letter(A.X.format_letter(c)) for c in e.label.x.letters]
        xs = free_reduce([-X.letter(e.source), *rx, X.letter(e.target)])
        out.append(PairElement(ReducedWord(X, xs), ReducedWord(Y_ALPHABET, e.label.y.letters)))
    return out


def witness_u() -> RingElement:
    W = load_witness_set()
    return RingElement(W.weighted(with_special=True))


def a_odd_mod4(n: int) -> int:
    """Closed-form channel: ``[1] u^(2n+1) mod 4 = 2 (2n+1) b_2n mod 4``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return (2 * (2 * n + 1) * b_closed_form(2 * n)) % 4


def verify_correspondence(n: int, budget: int = DEFAULT_TERM_CAP) -> bool:
    W = load_witness_set()
    lhs = pruned_identity_count(W.weighted(), n, PairElement.parse(TARGET_TEXT), budget=budget, frame=FRAME)
    return lhs == count_flat_paths(gamma(), n, budget)


def brute_force_u_mod4(n: int, budget: int = DEFAULT_TERM_CAP) -> int:
    """Search channel: ``[1] u^n mod 4`` over the weighted 20-term support."""
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be a positive odd exponent")
    W = load_witness_set()
    return pruned_identity_count(W.weighted(with_special=True), n, modulus=4, budget=budget, frame=FRAME)


# ---------------------------------------------------------------------------
# matrices

IntMatrix = tuple[tuple[int, ...], ...]

SANOV_A: IntMatrix = ((1, 2), (0, 1))
SANOV_B: IntMatrix = ((1, 0), (2, 1))
_SANOV = {1: SANOV_A, -1: ((1, -2), (0, 1)), 2: SANOV_B, -2: ((1, 0), (-2, 1))}


def mat_mul(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    cols = list(zip(*B))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in A)


def identity_matrix(d: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def det(M: IntMatrix) -> int:
    """Exact determinant by cofactor expansion (d <= 4 here)."""
    d = len(M)
    if d == 1:
        return M[0][0]
    if d == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    return sum(
        (-1) ** j * M[0][j] * det(tuple(row[:j] + row[j + 1 :] for row in M[1:])) for j in range(d) if M[0][j]
    )


def _sanov_letters(letters: Iterable[int]) -> IntMatrix:
    M = identity_matrix(2)
    for c in letters:
        M = mat_mul(M, _SANOV[c])
    return M


def sanov_matrix(w: ReducedWord) -> IntMatrix:
    if w.alphabet.rank != 2:
        raise ValueError("Sanov realization needs a rank-2 alphabet")
    return _sanov_letters(w.letters)


def embed_in_f2(letters: Sequence[int]) -> tuple[int, ...]:
    """Generator ``i`` (1-based) goes to ``a^(i-1) b a^-(i-1)``; a=1, b=2."""
    out: list[int] = []
    for c in letters:
        i = abs(c) - 1
        out += [1] * i + [2 if c > 0 else -2] + [-1] * i
    return free_reduce(out)


def _block_diag(P: IntMatrix, Q: IntMatrix) -> IntMatrix:
    return (
        (P[0][0], P[0][1], 0, 0),
        (P[1][0], P[1][1], 0, 0),
        (0, 0, Q[0][0], Q[0][1]),
        (0, 0, Q[1][0], Q[1][1]),
    )


def sl4_realize(e: PairElement) -> IntMatrix:
    return _block_diag(_sanov_letters(embed_in_f2(e.x.letters)), _sanov_letters(embed_in_f2(e.y.letters)))


def matrix_json(M: IntMatrix) -> str:
    # entries outgrow 64 bits quickly, so write them as decimal strings
    return json.dumps([[str(v) for v in row] for row in M])


def matrix_from_json(text: str) -> IntMatrix:
    return tuple(tuple(int(v) for v in row) for row in json.loads(text))


def random_word(alphabet: Alphabet, max_len: int, rng: random.Random) -> ReducedWord:
    n = rng.randint(0, max_len)
    letters: list[int] = []
    while len(letters) < n:
        c = rng.choice([1, -1]) * rng.randint(1, alphabet.rank)
        if letters and letters[-1] == -c:
            continue
        letters.append(c)
    return ReducedWord(alphabet, tuple(letters))


def homomorphism_check(samples: int = 1000, max_len: int = 8, seed: int = 0) -> bool:
    """``sl4_realize(pq) = sl4_realize(p) sl4_realize(q)`` and ``det = 1`` on random pairs."""
    rng = random.Random(seed)
    for _ in range(samples):
        p = PairElement(random_word(X_ALPHABET, max_len, rng), random_word(Y_ALPHABET, max_len, rng))
        q = PairElement(random_word(X_ALPHABET, max_len, rng), random_word(Y_ALPHABET, max_len, rng))
        Mp, Mq, Mpq = sl4_realize(p), sl4_realize(q), sl4_realize(p * q)
        if mat_mul(Mp, Mq) != Mpq or det(Mp) != 1 or det(Mpq) != 1:
            return False
    return True


_P = (1 << 31) - 1
_FP = np.array([0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F, 0x165667B19E3779F9, 0x27D4EB2F165667C5], dtype=np.uint64)


def _factor_collisions(rank: int, max_len: int, cap: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Distinct reduced words of length <= max_len with equal matrices.

    Words are grown level by level with their matrices mod a prime; each
    word gets a 64-bit fingerprint of its four residues.  The fingerprints
    are sorted and only repeated ones are rechecked with exact integers, on
    a second pass that rebuilds the words behind them.
    """
    letters = [c for i in range(1, rank + 1) for c in (i, -i)]
    gen_mod = {c: np.array(_sanov_letters(embed_in_f2((c,))), dtype=np.int64) % _P for c in letters}
    total = 1 + sum(len(letters) * (len(letters) - 1) ** (k - 1) for k in range(1, max_len + 1))
    if total > cap:
        raise BudgetExceeded("injectivity word count", total, cap)

    def fingerprint(m):
        return (m.astype(np.uint64) * _FP).sum(axis=1, dtype=np.uint64)

    def step(m, g):
        out = np.empty_like(m)
        out[:, 0] = (m[:, 0] * g[0, 0] + m[:, 1] * g[1, 0]) % _P
        out[:, 1] = (m[:, 0] * g[0, 1] + m[:, 1] * g[1, 1]) % _P
        out[:, 2] = (m[:, 2] * g[0, 0] + m[:, 3] * g[1, 0]) % _P
        out[:, 3] = (m[:, 2] * g[0, 1] + m[:, 3] * g[1, 1]) % _P
        return out

    # (last letter, parent row) per level, kept for all but the final level
    trail: list[tuple[np.ndarray, np.ndarray]] = [(np.zeros(1, np.int64), np.full(1, -1, np.int64))]

    def chunks():
        """Yield (level, letter, parent rows, fingerprints); level 0 is the empty word."""
        trail[1:] = []
        cur = np.array([[1, 0, 0, 1]], dtype=np.int64)
        yield 0, 0, np.zeros(1, np.int64), fingerprint(cur)
        for lvl in range(1, max_len + 1):
            prev_last = trail[-1][0]
            nxt, last, parent = [], [], []
            for c in letters:
                rows = np.nonzero(prev_last != -c)[0]
                out = step(cur[rows], gen_mod[c])
                yield lvl, c, rows, fingerprint(out)
                if lvl < max_len:
                    nxt.append(out)
                    last.append(np.full(len(rows), c, np.int64))
                    parent.append(rows)
            if lvl < max_len:
                cur = np.concatenate(nxt)
                trail.append((np.concatenate(last), np.concatenate(parent)))

    flat = np.empty(total, dtype=np.uint64)
    pos = 0
    for _, _, _, h in chunks():
        flat[pos : pos + len(h)] = h
        pos += len(h)
    flat.sort()
    dups = np.unique(flat[1:][flat[1:] == flat[:-1]])
    del flat
    if not len(dups):
        return []

    def word(lvl: int, i: int) -> tuple[int, ...]:
        out = []
        while lvl > 0:
            last, parent = trail[lvl]
            out.append(int(last[i]))
            i = int(parent[i])
            lvl -= 1
        return tuple(reversed(out))

    groups: dict[int, list[tuple[int, ...]]] = {}
    for lvl, c, rows, h in chunks():
        for k in np.nonzero(np.isin(h, dups))[0]:
            w = () if lvl == 0 else word(lvl - 1, int(rows[k])) + (c,)
            groups.setdefault(int(h[k]), []).append(w)
    bad = []
    for members in groups.values():
        seen: dict[IntMatrix, tuple[int, ...]] = {}
        for w in members:
            M = _sanov_letters(embed_in_f2(w))
            if M in seen:
                bad.append((seen[M], w))
            else:
                seen[M] = w
    return bad


@dataclass
class InjectivityReport:
    max_len: int
    x_words: int
    y_words: int
    collisions: list

    @property
    def injective(self) -> bool:
        return not self.collisions


def injectivity_check(max_len: int = 6, cap: int = 2 * 10**8) -> InjectivityReport:
    """Injectivity of :func:`sl4_realize` on pairs of total length <= max_len.

    The realization is block diagonal, so two pairs collide only if both of
    their factors collide; a pair of total length <= max_len has factors of
    length <= max_len, so checking each factor alone on words of length
    <= max_len is enough.
    """
    count = lambda r: 1 + sum(2 * r * (2 * r - 1) ** (k - 1) for k in range(1, max_len + 1))
    bad = [("X", u, v) for u, v in _factor_collisions(X_ALPHABET.rank, max_len, cap)]
    bad += [("Y", u, v) for u, v in _factor_collisions(Y_ALPHABET.rank, max_len, cap)]
    return InjectivityReport(max_len, count(X_ALPHABET.rank), count(Y_ALPHABET.rank), bad)


# ---------------------------------------------------------------------------
# free-group returns and the product construction


def free_return_count(rank: int, n: int, symmetric: bool = True) -> int:
    """Length-``n`` products of the ``2*rank`` letters ``a_i^{+-1}`` equal to 1.

    Radial count on the Cayley tree: from distance 0 every letter steps out,
    from distance d > 0 one letter steps in and ``2*rank - 1`` step out.  With
    ``symmetric=False`` only the ``rank`` positive letters are allowed, and
    the only product equal to 1 is the empty one.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if rank < 1:
        raise ValueError("rank must be positive")
    if not symmetric:
        return int(n == 0)
    q = 2 * rank
    dist = [1] + [0] * n
    for _ in range(n):
        new = [0] * (n + 1)
        for d, c in enumerate(dist):
            if not c:
                continue
            if d == 0:
                new[1] += q * c
            else:
                new[d - 1] += c
                if d + 1 <= n:
                    new[d + 1] += (q - 1) * c
        dist = new
    return dist[0]


def free_return_bruteforce(rank: int, n: int) -> int:
    """Oracle: enumerate all ``(2*rank)^n`` letter sequences."""
    from itertools import product

    letters = [c for i in range(1, rank + 1) for c in (i, -i)]
    return sum(1 for seq in product(letters, repeat=n) if not free_reduce(seq))


def product_return_bruteforce(n: int, rank_x: int, rank_y: int, budget: int = DEFAULT_TERM_CAP) -> int:
    """``[1] u_1^n`` for ``u_1`` = symmetric generators of ``F_rx x 1`` plus ``1 x F_ry``.

    Memoized over reduced partial products (exact, every sequence is counted).
    """
    steps = [(c, 0) for i in range(1, rank_x + 1) for c in (i, -i)]
    steps += [(0, c) for i in range(1, rank_y + 1) for c in (i, -i)]
    memo: dict = {}

    def go(px, py, r):
        if len(px) + len(py) > r:
            return 0
        if r == 0:
            return 1
        key = (px, py, r)
        hit = memo.get(key)
        if hit is not None:
            return hit
        total = 0
        for cx, cy in steps:
            nx = mul_letters(px, (cx,)) if cx else px
            ny = mul_letters(py, (cy,)) if cy else py
            total += go(nx, ny, r - 1)
        memo[key] = total
        if len(memo) > budget:
            raise BudgetExceeded("product return memo", len(memo), budget)
        return total

    return go((), (), n)


def egf_convolution_check(n: int, rank_x: int = 2, rank_y: int = 2) -> bool:
    """Direct count against ``sum_i C(n,i) r_x(i) r_y(n-i)``: exponential generating functions multiply."""
    lhs = product_return_bruteforce(n, rank_x, rank_y)
    rhs = sum(comb(n, i) * free_return_count(rank_x, i) * free_return_count(rank_y, n - i) for i in range(n + 1))
    return lhs == rhs


def u1_terms(X: Alphabet = X_ALPHABET, Y: Alphabet = Y_ALPHABET) -> list[tuple[PairElement, int]]:
    """``S_1 = (X x 1) u (1 x Y)`` with symmetric generating sets, weight 1 each."""
    gens = []
    for w in X.generators():
        gens += [(PairElement(g, Y.identity()), 1) for g in (w, ~w)]
    for w in Y.generators():
        gens += [(PairElement(X.identity(), g), 1) for g in (w, ~w)]
    return gens


def u2_element() -> RingElement:
    """``u_2 = 2 u_1 + sum(z)``: every element of ``S_1`` taken twice, plus ``S``."""
    W = load_witness_set()
    return RingElement([(g, 2) for g, _ in u1_terms()] + W.weighted())


def u2_parity_check(n: int, budget: int = DEFAULT_TERM_CAP) -> bool:
    """``[1] u_2^n = [1] u^n (mod 2)``, both sides computed exactly over the integers."""
    lhs = coeff_at_identity_pow(u2_element(), n, budget)
    rhs = coeff_at_identity_pow(witness_u(), n, budget)
    return (lhs - rhs) % 2 == 0
