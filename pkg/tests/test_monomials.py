from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from momentext.monomials import (
    Monomial,
    Poly,
    count_up_to,
    cross_diagonal,
    deglex_index,
    monomial_at,
    monomial_str,
    monomials_of_degree,
    monomials_up_to,
)

monos = st.builds(Monomial, st.integers(0, 8), st.integers(0, 8))
coefs = st.fractions(min_value=-6, max_value=6, max_denominator=4)
polys = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), coefs, max_size=6).map(Poly)


def test_deglex_examples():
    assert deglex_index(Monomial(0, 0)) == 0
    assert deglex_index(Monomial(1, 1)) == 4
    assert deglex_index(Monomial(3, 0)) == 6


def test_monomial_lists():
    assert monomials_up_to(0) == [Monomial(0, 0)]
    assert monomials_up_to(1) == [Monomial(0, 0), Monomial(1, 0), Monomial(0, 1)]
    three = monomials_up_to(3)
    assert len(three) == 10
    assert three[-4:] == [Monomial(3, 0), Monomial(2, 1), Monomial(1, 2), Monomial(0, 3)]
    assert [len(monomials_up_to(d)) for d in range(6)] == [count_up_to(d) for d in range(6)] == [1, 3, 6, 10, 15, 21]


@given(st.integers(0, 400))
def test_index_bijection(k):
    assert deglex_index(monomial_at(k)) == k


@given(monos, monos)
def test_index_monotone_in_degree_then_y(a, b):
    assert (deglex_index(a) < deglex_index(b)) == ((a.degree, a.j) < (b.degree, b.j))


def test_cross_diagonal_examples():
    for level in range(2):
        assert len(cross_diagonal(0, 1, level)) == 1
    assert cross_diagonal(1, 1, 1) == [(Monomial(1, 0), Monomial(0, 1)), (Monomial(0, 1), Monomial(1, 0))]
    assert sum(1 for level in range(20) if cross_diagonal(3, 4, level)) == 8


@given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 10))
def test_cross_diagonal_shares_one_moment(r, c, level):
    pairs = cross_diagonal(r, c, level)
    sums = {(a.i + b.i, a.j + b.j) for a, b in pairs}
    assert len(sums) <= 1
    if pairs:
        assert sums == {(r + c - level, level)}
        assert all(a.degree == r and b.degree == c for a, b in pairs)


def test_poly_format():
    q = Poly({(1, 0): -5, (0, 1): 20, (2, 1): -21, (1, 2): 8})
    assert q.format(upper=True) == "-5X + 20Y - 21X^2Y + 8XY^2"
    assert Poly({(0, 0): F(1, 4), (1, 0): F(-1, 4)}).format() == "1/4 - (1/4)x"
    assert Poly().format() == "0"
    assert monomial_str(Monomial(0, 0)) == "1"


def test_poly_drops_zero_terms():
    p = Poly({(1, 0): 1}) - Poly({(1, 0): 1})
    assert p.is_zero and p.degree == 0 and p == Poly()


@settings(max_examples=60)
@given(polys, polys, polys)
def test_ring_laws(p, q, r):
    assert p * q == q * p
    assert p * (q + r) == p * q + p * r
    assert (p + q) - q == p


@settings(max_examples=60)
@given(polys, st.integers(0, 3), st.integers(0, 3))
def test_shift_is_monomial_multiplication(p, a, b):
    s = p.shift(a, b)
    assert s == p * Poly.monomial(a, b)
    if not p.is_zero:
        assert s.degree == p.degree + a + b
    for m, c in p.items():
        assert s.coefficient(m.i + a, m.j + b) == c


@settings(max_examples=60)
@given(polys)
def test_vector_round_trip(p):
    d = max(p.degree, 0)
    v = p.to_vector(d)
    assert len(v) == count_up_to(d)
    assert Poly.from_vector(v) == p


def test_to_vector_rejects_high_degree():
    with pytest.raises(ValueError):
        Poly.monomial(3, 0).to_vector(2)


@settings(max_examples=60)
@given(polys, polys, coefs, coefs)
def test_evaluation_is_a_homomorphism(p, q, x, y):
    assert (p * q).evaluate(x, y) == p.evaluate(x, y) * q.evaluate(x, y)
    assert p.swapped().evaluate(y, x) == p.evaluate(x, y)


def test_degree_k_ordering():
    assert monomials_of_degree(2) == [Monomial(2, 0), Monomial(1, 1), Monomial(0, 2)]
