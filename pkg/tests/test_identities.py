import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from kleinvol import identities as ids
from kleinvol.errors import DomainError
from kleinvol.identities import LaurentPoly, X, Y

coeffs = st.dictionaries(st.integers(-6, 6), st.fractions(max_denominator=20).filter(bool), max_size=5)
polys = coeffs.map(LaurentPoly)


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


@given(polys, polys, st.floats(1.1, 2.0))
def test_evaluation_is_a_homomorphism(a, b, x):
    scale = max(1.0, abs(a(x)) * abs(b(x)), abs(a(x)) + abs(b(x)))
    assert math.isclose((a * b)(x), a(x) * b(x), rel_tol=1e-12, abs_tol=1e-12 * scale)
    assert math.isclose((a + b)(x), a(x) + b(x), rel_tol=1e-12, abs_tol=1e-12 * scale)


@given(polys, st.integers(0, 4))
def test_power_matches_repeated_product(a, n):
    out = LaurentPoly.const(1)
    for _ in range(n):
        out = out * a
    assert a ** n == out


def test_y_expands():
    assert Y == LaurentPoly({2: 1, 0: -2, -2: 1})
    assert hash(Y) == hash(LaurentPoly({-2: 1, 0: -2, 2: 1}))
    with pytest.raises(DomainError):
        X ** -1


def test_a2_small_case_by_hand():
    lhs, rhs = ids.lemma_a2_sides(2)
    assert rhs == Y * 2 + Y * Y * Fraction(1, 2)
    assert lhs == rhs


@pytest.mark.parametrize("k", range(1, 51))
def test_a2_a3_exact(k):
    assert ids.lemma_a2_check(k)
    assert ids.lemma_a3_check(k)


@pytest.mark.parametrize("k", [1, 2, 7, 20])
def test_a3_reduction(k):
    red = ids.lemma_a3_reduction(k)
    assert red.harmonic_left == red.harmonic_right
    assert red.polynomial_residual.is_zero()
    assert red.holds


@given(st.integers(1, 30), st.floats(1.05, 3.0))
def test_a2_evaluated(k, x):
    lhs, rhs = ids.lemma_a2_sides(k)
    direct = (x ** (2 * k) + x ** (-2 * k)) / k - 2 / k
    assert math.isclose(lhs(x), direct, rel_tol=1e-12, abs_tol=1e-12)
    y = (x - 1 / x) ** 2
    series = math.fsum(math.comb(k + j - 1, 2 * j - 1) * y ** j / j for j in range(1, k + 1))
    assert math.isclose(rhs(x), series, rel_tol=1e-11)


@pytest.mark.parametrize("k", [1, 2, 3, 6, 10])
@pytest.mark.parametrize("x", [math.exp(0.1), math.exp(0.25), 2.0])
def test_a1_within_tail_bound(k, x):
    chk = ids.lemma_a1_sides(k, x, 400)
    assert chk.residual <= chk.tail_bound
    assert chk.residual < 1e-10


def test_a1_truncation_error_decays_geometrically():
    x = math.exp(0.5)
    res = [ids.lemma_a1_sides(3, x, K).residual for K in (20, 30, 40)]
    assert res[0] > res[1] > res[2]
    assert res[1] / res[0] < 0.05 and res[2] / res[1] < 0.05
    for K in (20, 30, 40):
        chk = ids.lemma_a1_sides(3, x, K)
        assert chk.residual <= chk.tail_bound


def test_a1_without_acceleration_is_bounded():
    chk = ids.lemma_a1_sides(4, 1.5, 300, accelerate=False)
    assert chk.residual <= chk.tail_bound


def test_coefficient_chain():
    rep = ids.coefficient_chain(0.5, 15, 400)
    assert rep.lemma_a1 < 1e-10
    assert rep.ctilde_vs_c < 1e-10
    assert rep.c_vs_u < 1e-10


def test_domain_errors():
    for bad in (0, -1, 1.5):
        with pytest.raises(DomainError):
            ids.lemma_a2_sides(bad)
    with pytest.raises(DomainError):
        ids.lemma_a1_sides(2, 0.9, 100)
    with pytest.raises(DomainError):
        ids.lemma_a1_sides(5, 1.5, 5)
