import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kleinvol.errors import ConvergenceError, DomainError
from kleinvol.jets import Centre, Jet, ParityJet, PoleSum, cot2pi, exponential, monomial, pole, sin2pi


def taylor(f, a, n):
    with mpmath.workdps(40):
        return [float(c) for c in mpmath.taylor(f, mpmath.mpf(a), n)]


def laurent(f, a, lo, hi, r=0.05, m=128):
    """Coefficients lo..hi-1 of f around a from a contour trapezoid sum at 40 digits."""
    out = []
    with mpmath.workdps(40):
        for n in range(lo, hi):
            s = mpmath.mpf(0)
            for j in range(m):
                t = r * mpmath.expj(2 * mpmath.pi * j / m)
                s += f(mpmath.mpf(a) + t) * t ** (-n)
            out.append(float((s / m).real))
    return out


def test_centre_encoding():
    c = Centre.point(1.5)
    assert c.twice == 3 and Centre.point(0.3).twice is None
    assert Centre.lattice(3).offset(Centre.lattice(-2)) == 2.5
    assert (-c).twice == -3
    with pytest.raises(DomainError):
        Centre.point(float("inf"))


@pytest.mark.parametrize("a", [0.0, 0.5, 1.0, 0.3, -1.5])
def test_trig_jets(a):
    c = Centre.point(a)
    assert np.allclose(sin2pi(c, 8).c, taylor(lambda z: mpmath.sin(2 * mpmath.pi * z), a, 7), atol=1e-12, rtol=1e-13)
    ref = laurent(lambda z: mpmath.cot(2 * mpmath.pi * z), a, -1, 6)
    j = cot2pi(c, 6)
    got = [j.coeff(n) for n in range(-1, 6)]
    assert np.allclose(got, ref, rtol=1e-11, atol=1e-11)


def test_exact_zero_of_sine_on_lattice():
    assert sin2pi(Centre.lattice(7), 3).coeff(0) == 0.0
    assert cot2pi(Centre.lattice(7), 2).lo == -1


@given(st.floats(min_value=-2, max_value=2), st.floats(min_value=-3, max_value=3))
def test_exponential_and_monomial(a, alpha):
    c = Centre.point(a)
    e = exponential(c, alpha, 6)
    assert np.allclose(e.c, taylor(lambda z: mpmath.exp(alpha * z), a, 5), rtol=1e-12, atol=1e-14)
    m = monomial(c, 6, 3)
    got = [m.coeff(n) for n in range(6)]
    assert np.allclose(got, taylor(lambda z: z ** 3, a, 5), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("a,p,m", [(0.5, 0.5, 2), (0.2, -0.7, 3), (1.0, 0.0, 1)])
def test_pole_jets(a, p, m):
    j = pole(Centre.point(a), Centre.point(p), m, 5)
    if a == p:
        assert j.lo == -m and j.coeff(-m) == 1.0 and j.coeff(0) == 0.0
    else:
        assert np.allclose([j.coeff(n) for n in range(5)], taylor(lambda z: (z - p) ** (-m), a, 4), rtol=1e-12)


def test_product_reciprocal_and_window_tracking():
    c = Centre.point(0.0)
    s = sin2pi(c, 8)
    inv = s.reciprocal()
    one = s * inv
    assert one.coeff(0) == pytest.approx(1.0)
    assert all(abs(one.coeff(n)) < 1e-12 for n in range(1, one.hi))
    # 1/sin has a pole of order one and the window shrinks accordingly
    assert inv.lo == -1
    with pytest.raises(ConvergenceError):
        inv.coeff(inv.hi)


def test_derivative_and_reflection():
    c = Centre.point(0.3)
    e = exponential(c, 2.0, 6)
    assert np.allclose(e.deriv().c[1:], (2 * e).c[:-1][: len(e.deriv().c) - 1])
    j = Jet(-2, [1.0, 2.0, 3.0, 4.0])
    r = j.reflect()
    assert list(r.c) == [1.0, -2.0, 3.0, -4.0]


def test_polesum_parity_and_values():
    a = Centre.point(0.4)
    s = PoleSum({(a, 1): 2.0, (Centre.lattice(1), 2): -1.0})
    even, odd = s.parity()
    z = 0.77
    assert even(z) == pytest.approx(0.5 * (s(z) + s(-z)))
    assert odd(z) == pytest.approx(0.5 * (s(z) - s(-z)))
    # exact cancellation on subtraction
    assert len(s - s) == 0
    c = Centre.point(0.1)
    pj = ParityJet.of_poles(s, c, 4)
    assert np.allclose([pj.total().coeff(n) for n in range(4)], taylor(lambda z: 2 / (z - 0.4) - 1 / (z - 0.5) ** 2, 0.1, 3), rtol=1e-11)


def test_parity_jet_product_rules():
    c = Centre.point(0.25)
    f = ParityJet.of_poles(PoleSum({(Centre.point(0.6), 1): 1.0}), c, 5)
    g = ParityJet.of_poles(PoleSum({(Centre.point(-0.9), 2): 1.0}), c, 5)
    prod = f * g
    assert np.allclose(prod.total().c, (f.total() * g.total()).c, rtol=1e-13)
    d = f.deriv()
    assert np.allclose(d.total().c, f.total().deriv().c, rtol=1e-13)
