"""Exact arithmetic in O_n: relations, normal forms, serialization."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cuntzcal.algebra import (
    AlgebraElement,
    Coefficient,
    classify,
    element_from_json,
    element_to_json,
    format_element,
    parse_element,
)
from cuntzcal.words import enumerate_words


def S(n, *letters):
    return AlgebraElement.isometry(n, letters)


def test_cuntz_relations():
    # S_i* S_j = delta_ij 1 and sum_i S_i S_i* = 1, the defining relations.
    for n in (2, 3, 4):
        one = AlgebraElement.one(n)
        zero = AlgebraElement.zero(n)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                prod = S(n, i).adjoint() * S(n, j)
                assert prod == (one if i == j else zero)
        total = AlgebraElement.zero(n)
        for i in range(1, n + 1):
            total = total + S(n, i) * S(n, i).adjoint()
        assert total == one


def test_level_projections_partition_unity():
    for n in (2, 3):
        for k in (1, 2, 3):
            total = AlgebraElement.zero(n)
            for alpha in enumerate_words(n, k):
                total = total + AlgebraElement.projection(n, alpha)
            assert total == AlgebraElement.one(n)


def _random_factor(rng, n):
    which = rng.randrange(3)
    letter = rng.randrange(1, n + 1)
    if which == 0:
        return S(n, letter)
    if which == 1:
        return S(n, letter).adjoint()
    return AlgebraElement.scalar(
        n, Fraction(rng.randrange(-3, 4), rng.randrange(1, 5))
    )


def _fold(factors, order):
    # Multiply factors pairwise following a random association order: each
    # step fuses two adjacent entries until one element remains.
    items = list(factors)
    for pick in order:
        i = pick % (len(items) - 1)
        items[i : i + 2] = [items[i] * items[i + 1]]
    return items[0]


def random_reassociation_trial(rng, n, length):
    factors = [_random_factor(rng, n) for _ in range(length)]
    order_a = [rng.randrange(1000) for _ in range(length - 1)]
    order_b = [rng.randrange(1000) for _ in range(length - 1)]
    return _fold(factors, order_a), _fold(factors, order_b)


def test_normal_form_independent_of_association():
    rng = random.Random(928374)
    for _ in range(250):
        n = rng.choice((2, 3))
        length = rng.randrange(2, 9)
        left, right = random_reassociation_trial(rng, n, length)
        assert left == right


def test_known_reduction():
    # S_1* S_11 S_2* collapses to S_1 S_2*; the inner pair cancels.
    n = 2
    x = S(n, 1).adjoint() * S(n, 1, 1) * S(n, 2).adjoint()
    assert x == AlgebraElement.monomial(n, (1,), (2,))
    # A mixed product with no cancellation stays normal ordered.
    y = S(n, 2) * S(n, 1).adjoint()
    assert y.coefficient((2,), (1,)).re == 1
    assert y.term_count() == 1


coeffs = st.fractions(
    min_value=Fraction(-4), max_value=Fraction(4), max_denominator=6
)


@st.composite
def elements(draw, n=2, max_len=2, max_terms=3):
    x = AlgebraElement.zero(n)
    for _ in range(draw(st.integers(0, max_terms))):
        la = draw(st.integers(0, max_len))
        lb = draw(st.integers(0, max_len))
        alpha = tuple(draw(st.integers(1, n)) for _ in range(la))
        beta = tuple(draw(st.integers(1, n)) for _ in range(lb))
        re = draw(coeffs)
        im = draw(coeffs)
        x = x + AlgebraElement.monomial(n, alpha, beta, complex_pair(re, im))
    return x


def complex_pair(re, im):
    return Coefficient(re, im)


@settings(max_examples=60, deadline=None)
@given(elements(), elements(), elements())
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) * c == a * c + b * c
    assert a + b == b + a
    assert a - a == AlgebraElement.zero(2)


@settings(max_examples=60, deadline=None)
@given(elements(), elements())
def test_adjoint_is_antimultiplicative(a, b):
    assert (a * b).adjoint() == b.adjoint() * a.adjoint()
    assert a.adjoint().adjoint() == a


def test_coefficients_are_exact():
    n = 2
    third = AlgebraElement.scalar(n, Fraction(1, 3))
    assert third + third + third == AlgebraElement.one(n)
    i_unit = AlgebraElement.scalar(n, Coefficient(Fraction(0), Fraction(1)))
    assert i_unit * i_unit == -AlgebraElement.one(n)


def test_classify_flags():
    n = 2
    u = S(n, 1) * S(n, 2).adjoint() + S(n, 2) * S(n, 1).adjoint()
    facts = classify(u)
    assert facts.is_unitary and facts.sum_of_words
    p = AlgebraElement.projection(n, (1, 2))
    assert p.is_projection() and not p.is_unitary()
    assert classify(AlgebraElement.one(n)).is_unitary


def test_parse_and_format_round_trip():
    n = 2
    samples = [
        "S1 S2* + S2 S1*",
        "1/2 S11 S2* ( S2 S1* + S12 S21* )",
        "S1* S1",
        "2 + -3/4 S21 S21*",
    ]
    for text in samples:
        x = parse_element(n, text)
        again = parse_element(n, format_element(x) or "0")
        assert again == x


def test_parse_matches_hand_expansion():
    n = 2
    x = parse_element(n, "S1* S1")
    assert x == AlgebraElement.one(n)
    y = parse_element(n, "S12 S12*")
    assert y == AlgebraElement.projection(n, (1, 2))


def test_json_round_trip():
    n = 3
    x = AlgebraElement.monomial(n, (1, 3), (2,), Fraction(5, 7)) + S(n, 2)
    assert element_from_json(element_to_json(x)) == x


def test_mixed_alphabet_rejected():
    with pytest.raises(ValueError):
        AlgebraElement.one(2) * AlgebraElement.one(3)


def test_conditional_expectations():
    # Gauge averaging kills unbalanced terms; the diagonal expectation
    # keeps only alpha == beta. Both fix their ranges pointwise.
    n = 2
    mixed = S(n, 1) + AlgebraElement.monomial(n, (1,), (2,)) + AlgebraElement.projection(n, (2,))
    core = mixed.expect_core()
    assert core == AlgebraElement.monomial(n, (1,), (2,)) + AlgebraElement.projection(n, (2,))
    diag = mixed.expect_diagonal()
    assert diag == AlgebraElement.projection(n, (2,))
    assert core.expect_core() == core
    assert diag.expect_diagonal() == diag
