import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kleinvol.errors import DomainError
from kleinvol.specfun import (
    Precision,
    alternating_sum,
    dilog,
    dilog_mp,
    harmonic,
    log_sum_cosh,
    log_two_sinh_half,
    logcosh,
)


def li2_ref(x):
    with mpmath.workprec(200):
        return float(mpmath.polylog(2, mpmath.mpf(x)))


@pytest.mark.parametrize("x", [-1e6, -50.0, -2.0, -1.9999, -1.0, -0.5, -0.49, 0.0, 1e-8, 0.3, 0.5, 0.51, 0.9, 0.999999, 1.0])
def test_dilog_matches_200_bit_reference(x):
    assert dilog(x) == pytest.approx(li2_ref(x), rel=2e-15, abs=1e-300)


@given(st.floats(min_value=-1e8, max_value=1.0, allow_nan=False))
def test_dilog_property_vs_mpmath(x):
    assert abs(dilog(x) - li2_ref(x)) <= 4e-15 * max(1.0, abs(li2_ref(x)))


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_dilog_euler_reflection(x):
    lhs = dilog(x) + dilog(1 - x)
    assert lhs == pytest.approx(math.pi ** 2 / 6 - math.log(x) * math.log1p(-x), abs=1e-14)


@given(st.floats(min_value=1e-3, max_value=1e6))
def test_dilog_inversion(t):
    # Li2(-t) + Li2(-1/t) = -pi^2/6 - log^2(t)/2
    assert dilog(-t) + dilog(-1 / t) == pytest.approx(-math.pi ** 2 / 6 - 0.5 * math.log(t) ** 2,
                                                       rel=1e-13, abs=1e-13)


def test_dilog_vectorised_and_domain():
    xs = np.array([-3.0, -0.7, 0.2, 0.8])
    assert np.allclose(dilog(xs), [dilog(float(x)) for x in xs], rtol=0, atol=0)
    with pytest.raises(DomainError):
        dilog(1.5)
    with pytest.raises(DomainError):
        dilog(float("nan"))
    with pytest.raises(DomainError):
        dilog_mp(2)


@given(st.floats(min_value=1e-8, max_value=50.0))
def test_log_two_sinh_half(e):
    with mpmath.workprec(200):
        ref = float(mpmath.log(2 * mpmath.sinh(mpmath.mpf(e) / 2)))
    assert log_two_sinh_half(e) == pytest.approx(ref, rel=1e-14, abs=1e-15)


def test_logcosh_and_log_sum_cosh_do_not_overflow():
    assert logcosh(2000.0) == pytest.approx(2000.0 - math.log(2.0), rel=1e-15)
    assert log_sum_cosh(3000.0, 1.0) == pytest.approx(3000.0 - math.log(2.0), rel=1e-15)
    assert log_sum_cosh(0.0, 0.0) == pytest.approx(math.log(2.0), rel=1e-15)


def test_alternating_sum_known_series():
    # log 2 and pi/4, from 200 terms each
    t1 = [(-1) ** i / (i + 1) for i in range(200)]
    t2 = [(-1) ** i / (2 * i + 1) for i in range(200)]
    assert abs(alternating_sum(t1) - math.log(2)) < 1e-13
    assert abs(alternating_sum(t2) - math.pi / 4) < 1e-13
    # plain truncation is far worse
    assert abs(sum(t1) - math.log(2)) > 1e-4
    assert alternating_sum([]) == 0.0


def test_harmonic_and_precision():
    assert harmonic(0) == 0.0
    assert harmonic(4) == pytest.approx(25 / 12, rel=1e-15)
    assert not Precision(53).extended and Precision(200).extended
    with pytest.raises(DomainError):
        Precision(24)
