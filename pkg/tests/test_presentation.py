import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from sl2reps.errors import PresentationError, PresentationSyntaxError
from sl2reps.presentation import (
    GroupRingElement,
    Presentation,
    abelianization,
    enumerate_ball,
    exponent_sums,
    fox_derivative,
    fox_jacobian,
    free_group,
    free_reduce,
    parse_presentation,
    smith_normal_form,
    word_inverse,
    word_multiply,
    word_power,
)
from sl2reps.repvar import WEEKS_TEXT, Representation

from conftest import random_sl2

letters2 = st.sampled_from([1, -1, 2, -2])
words2 = st.lists(letters2, max_size=64)


def image_of(mats, w):
    out = np.eye(2, dtype=complex)
    for x in w:
        out = out @ (mats[x - 1] if x > 0 else np.linalg.inv(mats[-x - 1]))
    return out


# --- parsing ----------------------------------------------------------------


def test_parse_weeks():
    P = parse_presentation(WEEKS_TEXT)
    assert P.generator_names == ("a", "b")
    assert P.relators == ((1, 1, 2, 2, 1, 1, -2, 1, -2), (1, 1, 2, 2, -1, 2, -1, 2, 2))
    assert P.to_text() == WEEKS_TEXT
    assert parse_presentation(P.to_text()) == P


def test_parse_exponents_and_whitespace():
    P = parse_presentation("x1 , x2|x1^-3 x2 ^ 2,X2x1")
    assert P.relators == ((-1, -1, -1, 2, 2), (-2, 1))
    assert P.format_word(P.relators[0]) == "X1^3 x2^2"


def test_parse_free_reduces_relators():
    P = parse_presentation("a, b | a b B A a")
    assert P.relators == ((1,),)


def test_parse_no_relators():
    P = parse_presentation("a |")
    assert P.generator_count == 1 and P.relator_count == 0
    assert P.to_text() == "a |"


@pytest.mark.parametrize("text, position, fragment", [
    ("a, b | a c", 9, "unknown generator 'c'"),
    ("a | a^0", 6, "exponent 0"),
    ("a, b a", 6, "missing '|'"),
    ("a | a^", 6, "integer exponent"),
    ("a, a | a", 3, "duplicate"),
    ("a, | a", 3, "empty generator"),
    ("a | a,", 6, "relator expected"),
])
def test_parse_errors_carry_positions(text, position, fragment):
    with pytest.raises(PresentationSyntaxError) as info:
        parse_presentation(text)
    assert info.value.position == position
    assert fragment in str(info.value)
    assert f"position {position}" in str(info.value)


def test_presentation_rejects_bad_letters():
    with pytest.raises(PresentationError):
        Presentation(("a",), ((1, 2),))


@given(st.lists(words2, max_size=4))
def test_format_parse_round_trip(relators):
    P = Presentation(("a", "b"), tuple(tuple(r) for r in relators))
    assert parse_presentation(P.to_text()) == P


# --- free reduction ---------------------------------------------------------


@given(words2)
def test_free_reduce_is_reduced_and_idempotent(w):
    r = free_reduce(w)
    assert all(x != -y for x, y in zip(r, r[1:]))
    assert free_reduce(r) == r
    assert len(r) <= len(w) and (len(w) - len(r)) % 2 == 0


@given(words2, words2)
def test_word_multiply_is_a_homomorphism(u, v):
    assert word_multiply(u, v) == free_reduce(free_reduce(u) + free_reduce(v))
    assert word_multiply(u, word_inverse(u)) == ()
    assert exponent_sums(word_multiply(u, v), 2) == [
        a + b for a, b in zip(exponent_sums(u, 2), exponent_sums(v, 2))]


@settings(max_examples=50)
@given(words2)
def test_free_reduce_preserves_matrix_image(w):
    mats = [np.array([[1, 2], [0, 1]], dtype=complex), np.array([[1, 0], [2, 1]], dtype=complex)]
    assert np.allclose(image_of(mats, w), image_of(mats, free_reduce(w)))


def test_word_power():
    assert word_power((1, 2), 3) == (1, 2, 1, 2, 1, 2)
    assert word_power((1, 2), -2) == (-2, -1, -2, -1)
    assert word_power((1, 2), 0) == ()


# --- Fox calculus -----------------------------------------------------------


def ring(d):
    return GroupRingElement.from_dict(d)


def test_fox_examples():
    assert fox_derivative((1, 2), 1) == ring({(): 1})
    assert fox_derivative((1, 2), 2) == ring({(1,): 1})
    assert fox_derivative((-1,), 1) == ring({(-1,): -1})
    assert fox_derivative((1, 1, 1), 1) == ring({(): 1, (1,): 1, (1, 1): 1})
    # commutator a b A B
    comm = (1, 2, -1, -2)
    assert fox_derivative(comm, 1) == ring({(): 1, (1, 2, -1): -1})
    assert fox_derivative(comm, 2) == ring({(1,): 1, (1, 2, -1, -2): -1})


def test_fox_augmentation_is_exponent_sum():
    P = parse_presentation(WEEKS_TEXT)
    for r, row in zip(P.relators, fox_jacobian(P)):
        assert [d.augmentation() for d in row] == exponent_sums(r, 2)


def test_fox_index_out_of_range():
    with pytest.raises(PresentationError):
        fox_derivative((1,), 3, n=2)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=30), st.integers(0, 2**32 - 1))
def test_fox_fundamental_identity(w, seed):
    # rho(w) - I = sum_i rho(dw/dx_i) (rho(x_i) - I) for any matrices rho(x_i)
    rng = np.random.default_rng(seed)
    mats = [random_sl2(rng, 0.3) for _ in range(3)]
    lhs = image_of(mats, w) - np.eye(2)
    rhs = np.zeros((2, 2), dtype=complex)
    for i in range(1, 4):
        d = fox_derivative(w, i)
        rhs += d.evaluate(lambda u: image_of(mats, u), np.zeros((2, 2), dtype=complex)) @ (
            mats[i - 1] - np.eye(2))
    assert np.allclose(lhs, rhs, atol=1e-9 * max(1.0, np.abs(lhs).max()))


# --- Smith normal form and abelianization ----------------------------------


def sympy_invariants(A):
    m, n = A.shape
    D = sympy_snf(sympy.Matrix(A.tolist()), domain=sympy.ZZ)
    return sorted(abs(int(D[t, t])) for t in range(min(m, n)))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_smith_normal_form_against_sympy(m, n, data):
    A = np.array(data.draw(st.lists(st.integers(-9, 9), min_size=m * n, max_size=m * n)),
                 dtype=object).reshape(m, n)
    D, U, V = smith_normal_form(A)
    assert (U.dot(A).dot(V) == D).all()
    assert abs(int(sympy.Matrix(U.tolist()).det())) == 1
    assert abs(int(sympy.Matrix(V.tolist()).det())) == 1
    diag = [int(D[t, t]) for t in range(min(m, n))]
    assert all(d >= 0 for d in diag)
    off = D.copy()
    for t in range(min(m, n)):
        off[t, t] = 0
    assert not off.any()
    nonzero = [d for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))
    assert diag[:len(nonzero)] == nonzero
    assert sorted(diag) == sympy_invariants(A)


def test_weeks_abelianization():
    ab = abelianization(parse_presentation(WEEKS_TEXT))
    assert ab.invariant_factors == (5, 5)
    assert ab.rank_free == 0
    assert ab.torsion == (5, 5)


@pytest.mark.parametrize("text, factors, free", [
    ("a |", (0,), 1),
    ("a, b | a b A B", (0, 0), 2),
    ("a | a^6", (6,), 0),
    ("a, b | a^2, b^3", (6,), 0),
    ("a, b | a^4 b^6", (2, 0), 1),
    ("a, b, c | a b c", (0, 0), 2),
])
def test_abelianization_examples(text, factors, free):
    ab = abelianization(parse_presentation(text))
    assert ab.invariant_factors == factors
    assert ab.rank_free == free


def _rotate(w, k):
    return w[k:] + w[:k] if w else w


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(letters2, min_size=1, max_size=12), min_size=1, max_size=3), st.data())
def test_abelianization_invariant_under_relator_moves(relators, data):
    P = Presentation(("a", "b"), tuple(tuple(r) for r in relators))
    base = abelianization(P).invariant_factors
    perm = data.draw(st.permutations(list(P.relators)))
    moved = []
    for r in perm:
        r = _rotate(r, data.draw(st.integers(0, max(0, len(r) - 1))))
        if data.draw(st.booleans()):
            r = word_inverse(r)
        moved.append(free_reduce(r))
    assert abelianization(Presentation(("a", "b"), tuple(moved))).invariant_factors == base


# --- balls ------------------------------------------------------------------


SANOV = (np.array([[1, 2], [0, 1]], dtype=complex), np.array([[1, 0], [2, 1]], dtype=complex))


@pytest.mark.parametrize("L, count", [(0, 1), (1, 5), (2, 17), (3, 53)])
def test_free_group_ball_counts(L, count):
    F2 = free_group(2)
    ball = enumerate_ball(F2, Representation(F2, SANOV), L)
    assert len(ball) == count  # 1 + 4 * (3^L - 1) / 2
    lengths = [len(w) for w, _ in ball]
    assert lengths == sorted(lengths) and max(lengths) == L
    assert ball[0][0] == ()


def _brute_force_ball(P, rho, L, tol=1e-6):
    kept = []
    letters = [1, -1, 2, -2]
    for length in range(L + 1):
        for w in itertools.product(letters, repeat=length):
            if any(x == -y for x, y in zip(w, w[1:])):
                continue
            g = rho.image(w)
            if all(np.max(np.abs(g - h)) >= tol * max(1, np.linalg.norm(g), np.linalg.norm(h))
                   for _, h in kept):
                kept.append((w, g))
    return kept


def test_weeks_ball_matches_brute_force(weeks, weeks_ref):
    ball = enumerate_ball(weeks, weeks_ref, 4)
    brute = _brute_force_ball(weeks, weeks_ref, 4)
    assert len(ball) == len(brute)
    assert len(enumerate_ball(weeks, weeks_ref, 3)) == 53
    assert [w for w, _ in ball] == [w for w, _ in brute]


def test_ball_elements_pairwise_distinct(weeks, weeks_ref):
    ball = enumerate_ball(weeks, weeks_ref, 5)
    mats = np.array([g for _, g in ball])
    for k, g in enumerate(mats):
        gaps = np.max(np.abs(mats - g), axis=(1, 2))
        gaps[k] = np.inf
        assert gaps.min() > 1e-6


def test_ball_respects_relators(weeks, weeks_ref):
    # a relator is trivial in the group, so its word never survives as a new element
    ball = enumerate_ball(weeks, weeks_ref, 5)
    words = {w for w, _ in ball}
    assert len(ball) < 1 + 4 * (3 ** 5 - 1) // 2
    assert all(w == free_reduce(w) for w in words)


def test_identity_token():
    P = parse_presentation("a, b | 1, a b 1 B")
    assert P.relators == ((), (1,))
    assert P.format_word(()) == "1"


# --- further examples and axioms -------------------------------------------


def test_cancelling_relator_becomes_empty_word():
    assert parse_presentation("a | a A").relators == ((),)


@pytest.mark.parametrize("w, reduced", [
    ((1, 2, -2, 1), (1, 1)),
    ((), ()),
    ((1, 2, -1, 1, -2), (1,)),
])
def test_free_reduce_examples(w, reduced):
    assert free_reduce(w) == reduced


def test_word_examples():
    assert word_multiply((1, 2), (-2, 3)) == (1, 3)
    assert word_inverse((1, 2)) == (-2, -1)
    u = (1, 1, 2, 2, 2)
    assert word_multiply(u, word_inverse(u)) == ()


def test_fox_example_with_inverse():
    # d(A b a)/da = -A + A b
    assert fox_derivative((-1, 2, 1), 1) == ring({(-1,): -1, (-1, 2): 1})


@given(words2, words2)
def test_fox_product_rule(u, v):
    for i in (1, 2):
        lhs = fox_derivative(word_multiply(u, v), i)
        rhs = fox_derivative(u, i) + fox_derivative(v, i).left_multiply(u)
        assert lhs == rhs


def test_fox_axioms_on_generators():
    assert fox_derivative((1,), 1) == ring({(): 1})
    assert fox_derivative((2,), 1) == ring({})
    assert fox_derivative((-1,), 1) == ring({(-1,): -1})


def test_group_ring_canonical_form():
    x = GroupRingElement.from_terms([(2, (1, -1)), (-2, ()), (3, (2,)), (1, (1,))])
    assert x.terms == ((1, (1,)), (3, (2,)))
    assert (x - x).terms == ()


@pytest.mark.parametrize("text, factors, free", [
    ("a, b |", (0, 0), 2),
    ("a | a^5", (5,), 0),
])
def test_abelianization_more_examples(text, factors, free):
    ab = abelianization(parse_presentation(text))
    assert (ab.invariant_factors, ab.rank_free) == (factors, free)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(letters2, min_size=1, max_size=12), min_size=1, max_size=3),
       st.lists(st.lists(letters2, max_size=4), min_size=3, max_size=3))
def test_abelianization_invariant_under_conjugating_relators(relators, conjugators):
    P = Presentation(("a", "b"), tuple(tuple(r) for r in relators))
    moved = tuple(word_multiply(word_multiply(u, r), word_inverse(u))
                  for r, u in zip(P.relators, conjugators))
    assert abelianization(Presentation(("a", "b"), moved)).invariant_factors == \
        abelianization(P).invariant_factors
