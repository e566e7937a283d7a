from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from precurse.errors import BudgetExceeded, ModulusMismatch, PrecurseError
from precurse.ring import RingElement, coeff_at_identity_pow, frame_certificate, pruned_identity_count, ring_mul
from precurse.witness import FRAME, load_witness_set
from precurse.words import X_ALPHABET, Y_ALPHABET, PairElement, ReducedWord, free_reduce

X, Y = X_ALPHABET, Y_ALPHABET


def el(text):
    return PairElement.parse(text)


def x_plus_xinv(modulus=None):
    return RingElement({el("x"): 1, el("x^-1"): 1}, modulus)


def brute_identity_count(gens, n, target=None):
    """Oracle: every length-n sequence, multiplied out letter by letter."""
    tx, ty = target.key if target else ((), ())
    total = 0
    for seq in itertools.product(range(len(gens)), repeat=n):
        px = free_reduce(c for i in seq for c in gens[i][0].x.letters)
        py = free_reduce(c for i in seq for c in gens[i][0].y.letters)
        if px == tx and py == ty:
            w = 1
            for i in seq:
                w *= gens[i][1]
            total += w
    return total


def test_binomial_square():
    sq = ring_mul(x_plus_xinv(), x_plus_xinv())
    assert sq.terms == {el("x x"): 1, el("1"): 2, el("x^-1 x^-1"): 1}


def test_zero_and_one():
    a = x_plus_xinv()
    assert len(ring_mul(a, RingElement())) == 0
    assert ring_mul(RingElement.one(), a) == a


def test_modulus_mismatch():
    with pytest.raises(ModulusMismatch):
        ring_mul(x_plus_xinv(4), x_plus_xinv())


def test_zero_terms_dropped():
    assert len(RingElement({el("x"): 4}, modulus=4)) == 0
    assert len(RingElement([(el("x"), 1), (el("x"), -1)])) == 0


@pytest.mark.parametrize("n, expected", [(0, 1), (2, 2), (3, 0), (4, 6), (6, 20)])
def test_identity_coefficient_on_z(n, expected):
    assert coeff_at_identity_pow(x_plus_xinv(), n) == expected


def test_budget_guard():
    u = RingElement({el(t): 1 for t in ["x", "x^-1", "0x", "0x^-1", "y", "y^-1"]})
    with pytest.raises(BudgetExceeded):
        coeff_at_identity_pow(u, 8, cap=100)


small_terms = st.dictionaries(
    st.sampled_from(["x", "x^-1", "0x", "y", "y^-1", "x y", "1", "0x^-1 y"]).map(el),
    st.integers(-3, 3),
    max_size=4,
)


@settings(max_examples=60)
@given(small_terms, small_terms, small_terms)
def test_associative_and_distributive(a, b, c):
    A, B, C = RingElement(a), RingElement(b), RingElement(c)
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C


@settings(max_examples=40)
@given(small_terms, small_terms)
def test_modular_matches_exact(a, b):
    A, B = RingElement(a), RingElement(b)
    assert (A * B).reduce_mod(4) == A.reduce_mod(4) * B.reduce_mod(4)


GEN_FIXTURES = {
    "free_x": [(el("x"), 1), (el("x^-1"), 1)],
    "product_sym": [(el(t), 1) for t in ["x", "x^-1", "0x", "0x^-1", "y", "y^-1"]],
    "weighted": [(el("x y"), 2), (el("x^-1"), 1), (el("y^-1"), 3), (el("0x 0x^-1"), 1)],
}


@pytest.mark.parametrize("name", sorted(GEN_FIXTURES))
@pytest.mark.parametrize("n", range(0, 7))
def test_pruned_matches_power_and_brute_force(name, n):
    gens = GEN_FIXTURES[name]
    u = RingElement(gens)
    expected = brute_identity_count(gens, n)
    assert coeff_at_identity_pow(u, n) == expected
    assert pruned_identity_count(gens, n) == expected


@pytest.mark.parametrize("n", range(0, 9))
def test_pruned_matches_power_up_to_8(n):
    gens = GEN_FIXTURES["product_sym"]
    assert pruned_identity_count(gens, n) == coeff_at_identity_pow(RingElement(gens), n)


@pytest.mark.parametrize("n", range(0, 8))
def test_nonnegative_weights_give_nonnegative_counts(n):
    assert pruned_identity_count(GEN_FIXTURES["weighted"], n) >= 0


@pytest.mark.parametrize("n", range(1, 8))
def test_witness_unframed_matches_framed(n):
    S = load_witness_set()
    target = el("s1^-1 s8")
    gens = S.weighted()
    assert pruned_identity_count(gens, n, target) == pruned_identity_count(gens, n, target, frame=FRAME)
    u = S.weighted(with_special=True)
    assert pruned_identity_count(u, n, modulus=4) == pruned_identity_count(u, n, modulus=4, frame=FRAME)


@pytest.mark.parametrize("n", range(1, 7))
def test_witness_pruned_matches_power(n):
    S = load_witness_set()
    u = RingElement(S.weighted(with_special=True))
    assert pruned_identity_count(S.weighted(with_special=True), n) == coeff_at_identity_pow(u, n)


@pytest.mark.parametrize("n", [1, 3, 5, 7])
def test_modular_search_matches_exact(n):
    S = load_witness_set()
    u = S.weighted(with_special=True)
    assert pruned_identity_count(u, n, modulus=4) == pruned_identity_count(u, n) % 4


def test_certificate_refuses_x_trivial_cycle():
    # s1 -> s1 with X-label x, then x^-1: a closed walk with trivial X-label
    gens = [(el("s1^-1 x s1"), 1), (el("s1^-1 x^-1 s1"), 1)]
    cert = frame_certificate(gens, ["s1"], 4)
    assert not cert.ok and len(cert.witness) == 2
    with pytest.raises(PrecurseError):
        pruned_identity_count(gens, 4, frame=["s1"])


def test_certificate_accepts_witness_set():
    S = load_witness_set()
    assert frame_certificate(S.weighted(), FRAME, 30, el("s1^-1 s8")).ok


def test_certificate_excuses_nilpotent_weights_mod4():
    S = load_witness_set()
    cert = frame_certificate(S.weighted(with_special=True), FRAME, 25, modulus=4)
    assert cert.ok and cert.excused == [19]
    # without the modulus the doubled closing term gives real X-trivial cycles
    assert not frame_certificate(S.weighted(with_special=True), FRAME, 25).ok


def test_unframed_generator_rejected():
    with pytest.raises(PrecurseError):
        frame_certificate([(el("x"), 1)], FRAME, 3)
