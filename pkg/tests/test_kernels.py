import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kleinvol import kernels as K
from kleinvol.errors import DomainError

length = st.floats(min_value=0.0, max_value=40.0)
pos = st.floats(min_value=0.05, max_value=40.0)
eps_st = st.floats(min_value=0.01, max_value=1.7)


def mp(fn, *args, prec=200):
    with mpmath.workprec(prec):
        return float(fn(*args))


@given(length, length)
def test_R_at_zero_length_is_x(x, y):
    assert K.kernel_R(x, y, 0.0) == pytest.approx(x, abs=1e-12)


@given(length, length, length)
def test_D_symmetric_and_equal_to_composed_form(x, y, z):
    d = K.kernel_D(x, y, z)
    assert d == K.kernel_D(x, z, y)
    assert d == pytest.approx(K.kernel_D_composed(x, y, z), abs=1e-11 * max(1.0, x))


@given(pos, pos, pos)
def test_F_symmetric(x, y, z):
    assert K.kernel_F(x, y, z) == pytest.approx(K.kernel_F(x, z, y), rel=1e-12, abs=1e-13)


@given(length, length)
def test_E_and_Ecal_vanish_at_zero(y, z):
    assert K.kernel_E(0.0, y, z) == 0.0
    assert K.kernel_Ecal(0.0, y, 0.5) == pytest.approx(0.0, abs=1e-13 * max(1.0, y * y))


@pytest.mark.parametrize("name", ["R", "D", "E", "F"])
@given(x=pos, y=pos, z=pos)
def test_double_matches_200_bit(name, x, y, z):
    f = getattr(K, f"kernel_{name}")
    fm = getattr(K, f"kernel_{name}_mp")
    ref = mp(fm, x, y, z)
    assert abs(f(x, y, z) - ref) <= 1e-12 * max(1.0, x)


def test_tail_region_stays_accurate():
    # z far beyond x + y: the result is tiny and must not be a cancelled difference
    for x, y, z in [(1.0, 2.0, 80.0), (5.0, 0.1, 300.0), (0.3, 0.3, 1500.0)]:
        ref = mp(K.kernel_R_mp, x, y, z)
        assert K.kernel_R(x, y, z) == pytest.approx(ref, rel=1e-12)


def test_large_lengths_finite():
    v = K.kernel_R(3000.0, 2000.0, 2500.0)
    assert math.isfinite(v)
    assert K.kernel_D(3000.0, 1000.0, 1500.0) == pytest.approx(mp(K.kernel_D_mp, 3000, 1000, 1500), rel=1e-13)


@given(length, length, eps_st)
def test_lambda_inversion(x, y, e):
    lam = K.lambda_upper(x, y, e)
    lhs = math.cosh(x / 2) + math.cosh(y / 2)
    assert 2 * math.sinh(e / 2) * math.sinh(lam / 2) == pytest.approx(lhs, rel=1e-12)
    assert lam == pytest.approx(mp(K.lambda_upper_mp, x, y, e), rel=1e-13)


@pytest.mark.parametrize("x", [0.5, 2.0, 5.0])
@pytest.mark.parametrize("y", [0.3, 1.5, 4.0])
@pytest.mark.parametrize("e", [0.2, 0.8])
def test_Ecal_closed_form_vs_quadrature(x, y, e):
    with mpmath.workdps(30):
        top = K.lambda_upper_mp(x, y, e)
        q = mpmath.quad(lambda z: K.kernel_E_mp(x, y, z) / mpmath.tanh(z / 2), mpmath.linspace(e, top, 8))
    assert K.kernel_Ecal(x, y, e) == pytest.approx(float(q), rel=1e-8)


@given(pos, pos, st.floats(min_value=0.1, max_value=8.0))
def test_ecal_antiderivative_by_finite_difference(x, y, z):
    h = 1e-4
    fd = (K.ecal_antiderivative(x, y, z + h) - K.ecal_antiderivative(x, y, z - h)) / (2 * h)
    ref = K.kernel_E(x, y, z) / math.tanh(z / 2)
    assert fd == pytest.approx(ref, rel=1e-6, abs=1e-6)


@given(st.floats(min_value=0.0, max_value=30.0), st.floats(min_value=0.0, max_value=30.0))
def test_x_derivatives_at_zero(y, z):
    h = mpmath.mpf("1e-30")
    with mpmath.workprec(300):
        r = float(K.kernel_R_mp(h, y, z) / h)
        d = float(K.kernel_D_mp(h, y, z) / h)
        e = float(K.kernel_Ecal_mp(h, y, 0.5) / h)
    assert K.kernel_R_dx0(y, z) == pytest.approx(r, rel=1e-12, abs=1e-14)
    assert K.kernel_D_dx0(y, z) == pytest.approx(d, rel=1e-12, abs=1e-14)
    assert K.kernel_Ecal_dx0(y, 0.5) == pytest.approx(e, rel=1e-12, abs=1e-14)


def test_broadcasting():
    x = np.array([1.0, 2.0, 3.0])
    out = K.kernel_R(x, 1.0, 2.0)
    assert out.shape == (3,)
    assert np.allclose(out, [K.kernel_R(v, 1.0, 2.0) for v in x], rtol=0, atol=1e-15)


def test_domain_errors():
    with pytest.raises(DomainError):
        K.kernel_R(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        K.kernel_D(1.0, float("inf"), 1.0)
    with pytest.raises(DomainError):
        K.RegEps(0.0)
    with pytest.raises(DomainError):
        K.RegEps(2.0)  # sinh(1) > 1
    assert K.RegEps(K.EPS_MAX).eps == pytest.approx(1.7627471740390859)
