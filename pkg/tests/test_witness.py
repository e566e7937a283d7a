from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from precurse.automaton import count_flat_paths, gamma
from precurse.ring import coeff_at_identity_pow
from precurse.witness import (
    SANOV_A,
    SANOV_B,
    TARGET_TEXT,
    _Z_TEXT,
    a_odd_mod4,
    brute_force_u_mod4,
    det,
    edge_elements,
    egf_convolution_check,
    embed_in_f2,
    free_return_bruteforce,
    free_return_count,
    homomorphism_check,
    identity_matrix,
    injectivity_check,
    load_witness_set,
    mat_mul,
    matrix_from_json,
    matrix_json,
    product_return_bruteforce,
    random_word,
    sanov_matrix,
    sl4_realize,
    u2_parity_check,
    verify_correspondence,
    witness_u,
)
from precurse.words import X_ALPHABET, Y_ALPHABET, Alphabet, PairElement, ReducedWord, free_reduce

F2 = Alphabet("F2", ("a", "b"))


def el(text):
    return PairElement.parse(text)


# ---------------------------------------------------------------------------
# the set S and the element u


def test_fixture_matches_embedded_copy():
    W = load_witness_set()
    assert len(W.z) == 19
    assert [str(z) for z in W.z] == [str(el(t)) for t in _Z_TEXT]


def test_terms_round_trip_through_parser():
    for z in load_witness_set().z:
        assert PairElement.parse(str(z)) == z


def test_terms_distinct():
    assert len(set(load_witness_set().z)) == 19


def test_terms_biject_with_graph_edges():
    # one z per edge s_i -r-> s_j, equal to s_i^-1 r s_j
    edges = edge_elements()
    assert len(edges) == len(gamma().edges) == 19
    assert Counter(edges) == Counter(load_witness_set().z)


def test_edge_elements_by_hand():
    A = gamma()
    for e, z in zip(A.edges, edge_elements()):
        rx = " ".join(A.X.format_letter(c) for c in e.label.x.letters)
        ry = " ".join(Y_ALPHABET.format_letter(c) for c in e.label.y.letters)
        text = " ".join(t for t in (f"{e.source}^-1", rx, ry, e.target) if t)
        assert el(text) == z


def test_u_support_and_coefficients():
    u = witness_u()
    assert len(u) == 20
    assert u.terms[el("s1^-1 x y s1")] == 1
    assert u.terms[el("s8^-1 s1")] == 2
    assert sorted(u.terms.values()) == [1] * 19 + [2]


# ---------------------------------------------------------------------------
# correspondence and the mod-4 law


@pytest.mark.parametrize("n,expected", [(7, 1), (8, 0), (15, 1), (16, 0)])
def test_correspondence_small(n, expected):
    assert count_flat_paths(gamma(), n) == expected
    assert verify_correspondence(n)


def test_a_odd_mod4_values():
    assert a_odd_mod4(0) == 0
    assert a_odd_mod4(7) == 0
    # b_16 = 0 by the path DFS, so the n = 8 value is 0
    assert a_odd_mod4(8) == 0
    # b_24 = 1
    assert a_odd_mod4(12) == 2


@pytest.mark.parametrize("n", range(0, 31))
def test_a_odd_mod4_against_dfs(n):
    assert a_odd_mod4(n) == 2 * (2 * n + 1) * count_flat_paths(gamma(), 2 * n) % 4


def test_a_odd_mod4_rejects_negative():
    with pytest.raises(ValueError):
        a_odd_mod4(-1)


@pytest.mark.parametrize("n", [1, 3, 5, 7, 9, 11, 13])
def test_u_mod4_small_odd(n):
    assert brute_force_u_mod4(n) == 0 == a_odd_mod4((n - 1) // 2)


@pytest.mark.parametrize("n", [1, 3, 5, 7])
def test_u_mod4_against_exact_power(n):
    # independent route: full ring powers over the integers
    assert brute_force_u_mod4(n) == coeff_at_identity_pow(witness_u(), n) % 4


@pytest.mark.parametrize("n", [0, 2, -1])
def test_u_mod4_rejects_even(n):
    with pytest.raises(ValueError):
        brute_force_u_mod4(n)


# ---------------------------------------------------------------------------
# matrices


def test_sanov_identity():
    I = identity_matrix(2)
    assert sanov_matrix(F2.identity()) == I
    assert sanov_matrix(F2.word("a a^-1")) == I
    assert sanov_matrix(F2.word("a")) == SANOV_A
    assert sanov_matrix(F2.word("b")) == SANOV_B


def test_sanov_needs_rank_two():
    with pytest.raises(ValueError):
        sanov_matrix(X_ALPHABET.identity())


@given(st.integers(0, 2**32))
def test_sanov_homomorphism(seed):
    rng = random.Random(seed)
    u, v = random_word(F2, 10, rng), random_word(F2, 10, rng)
    Mu, Mv = sanov_matrix(u), sanov_matrix(v)
    assert mat_mul(Mu, Mv) == sanov_matrix(u * v)
    assert det(Mu) == 1


def test_sanov_faithful_short_words():
    # nonempty reduced words of length <= 8 never map to the identity
    I = identity_matrix(2)
    for n in range(1, 9):
        for seq in itertools.product((1, -1, 2, -2), repeat=n):
            if free_reduce(seq) == seq:
                assert sanov_matrix(ReducedWord(F2, seq)) != I


def test_embedding_is_conjugate_basis():
    assert embed_in_f2((1,)) == (2,)
    assert embed_in_f2((3,)) == (1, 1, 2, -1, -1)
    assert embed_in_f2((-2,)) == (1, -2, -1)
    assert embed_in_f2((2, -2)) == ()


def test_sl4_identity():
    assert sl4_realize(el("1")) == identity_matrix(4)


def test_sl4_homomorphism_sampled():
    assert homomorphism_check(samples=1000)


def test_sl4_block_structure():
    M = sl4_realize(el("s1 x^-1 0y"))
    assert M[0][2] == M[0][3] == M[1][2] == M[1][3] == 0
    assert M[2][0] == M[2][1] == M[3][0] == M[3][1] == 0
    assert det(M) == 1


def test_injective_short():
    rep = injectivity_check(max_len=4)
    assert rep.injective
    assert rep.x_words == 1 + sum(22 * 21 ** (k - 1) for k in range(1, 5))
    assert rep.y_words == 1 + sum(6 * 5 ** (k - 1) for k in range(1, 5))


def test_injective_small_alphabets_by_hand():
    # all pairs of total length <= 3 over the real alphabets, compared as matrices
    seen = {}
    for e in _short_pairs(3):
        M = sl4_realize(e)
        assert seen.setdefault(M, e) == e


def _short_pairs(n):
    def words(A, k):
        letters = [c for i in range(1, A.rank + 1) for c in (i, -i)]
        for m in range(k + 1):
            for seq in itertools.product(letters, repeat=m):
                if free_reduce(seq) == seq:
                    yield ReducedWord(A, seq)

    for x in words(X_ALPHABET, n):
        for y in words(Y_ALPHABET, n - len(x.letters)):
            yield PairElement(x, y)


def test_matrix_json_round_trip():
    M = sl4_realize(el(" ".join(["s1", "s2"] * 30)))
    text = matrix_json(M)
    assert matrix_from_json(text) == M
    assert max(abs(v) for row in M for v in row) > 2**63


# ---------------------------------------------------------------------------
# free-group returns and the product construction


def test_free_return_values():
    assert free_return_count(2, 2) == 4
    assert free_return_count(2, 4) == 28
    assert free_return_count(2, 0) == 1
    assert all(free_return_count(2, n) == 0 for n in (1, 3, 5, 7))


def test_free_return_nonsymmetric_is_degenerate():
    assert [free_return_count(3, n, symmetric=False) for n in range(5)] == [1, 0, 0, 0, 0]


@pytest.mark.parametrize("rank,n", [(2, n) for n in range(9)] + [(3, n) for n in range(7)])
def test_free_return_matches_enumeration(rank, n):
    assert free_return_count(rank, n) == free_return_bruteforce(rank, n)


def test_product_returns_small():
    assert product_return_bruteforce(0, 2, 2) == 1
    assert product_return_bruteforce(1, 2, 2) == 0
    assert product_return_bruteforce(2, 2, 2) == 8


@pytest.mark.parametrize("n", range(0, 9))
def test_egf_convolution(n):
    assert egf_convolution_check(n)


def test_egf_convolution_uneven_ranks():
    assert all(egf_convolution_check(n, 3, 1) for n in range(7))


@pytest.mark.parametrize("n", range(0, 7))
def test_u2_parity(n):
    assert u2_parity_check(n)


@pytest.mark.slow
@pytest.mark.parametrize("n", [7, 8])
def test_u2_parity_slow(n):
    assert u2_parity_check(n)


def test_target_text():
    assert el(TARGET_TEXT) == ~el("s8^-1 s1")
