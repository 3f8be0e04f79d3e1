import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from kleinvol import rtr
from kleinvol.chi1 import T11, T_HALF2, Topology, u_coeff, v_half_1_aux
from kleinvol.errors import DomainError

P = rtr.RefinedParams(1.0, 0.5, 200)


def _g_complex(z, eps, K):
    k = np.arange(1, K + 1)
    return (np.sinh(2 * eps * z) / z
            + np.sum(np.exp(2 * (z - k / 2) * eps) / (z - k / 2) - np.exp(-2 * (z + k / 2) * eps) / (z + k / 2)))


def _omega_half_1_complex(z, p):
    return p.bb / 2 * (-2 * np.pi / np.tan(2 * np.pi * z) + _g_complex(z, p.eps.eps, p.K))


def _contour_coeff(f, a, m, r=0.1, n=256):
    """Coefficient of (z-a)^{-m} by the trapezoid rule on a circle."""
    th = 2 * np.pi * np.arange(n) / n
    w = r * np.exp(1j * th)
    vals = np.array([f(a + x) for x in w])
    return float(np.real(np.mean(vals * w ** m)))


# ---------------------------------------------------------------------------
# omega_{1/2,1}


def test_residue_spectrum_exact():
    spectrum = rtr.residue_spectrum(P, 20)
    for t, r in spectrum.items():
        want = -P.bb / 2 if t == 0 else (-P.bb if t < 0 else 0.0)
        assert abs(r - want) < 1e-12


@pytest.mark.parametrize("t", [-4, -3, -1, 0, 1, 2, 5])
def test_residues_match_contour_oracle(t):
    p = rtr.RefinedParams(0.7, 0.4, 120)
    f = lambda z: _omega_half_1_complex(z, p)
    got = rtr.omega_half_1_form(p).principal(t)
    assert abs(got.get(1, 0.0) - _contour_coeff(f, t / 2, 1)) < 1e-9
    # no higher-order poles
    assert abs(_contour_coeff(f, t / 2, 2)) < 1e-9
    assert all(abs(c) < 1e-12 for m, c in got.items() if m > 1)


@given(st.floats(0.03, 1.9).filter(lambda z: abs(2 * z - round(2 * z)) > 0.02))
def test_anti_invariant_part(z):
    # omega + (bb/2) dy/y is even as a coefficient function
    c = lambda u: rtr.omega_half_1(u, P).value + P.bb * math.pi / math.tan(2 * math.pi * u)
    assert abs(c(z) - c(-z)) < 1e-9 * max(1.0, abs(c(z)))


@pytest.mark.parametrize("z", [0.13, 0.41, 0.77, 1.29])
def test_delta_and_varpi(z):
    w = lambda u: rtr.omega_half_1(u, P).value
    delta = rtr.delta_omega_half_1(z, P)
    assert abs(delta - (w(z) + w(-z))) < 1e-9 * max(1.0, abs(delta))
    dvarpi = rtr.varpi_half_1(z, P) + rtr.varpi_half_1(-z, P)
    assert abs(delta + P.bb * dvarpi) < 1e-9 * max(1.0, abs(delta))
    # omega = (bb/2)(-dy/y - delta varpi), with dy/y = 2 pi cot(2 pi z) dz
    rhs = P.bb / 2 * (-2 * math.pi / math.tan(2 * math.pi * z) - dvarpi)
    assert abs(w(z) - rhs) < 1e-9 * max(1.0, abs(rhs))


def test_value_matches_complex_oracle_on_real_line():
    for z in (0.21, -0.63, 1.37):
        assert abs(rtr.omega_half_1(z, P).value - _omega_half_1_complex(complex(z), P).real) < 1e-10


def test_half_one_laplace_image():
    for b in (0.3, 1.0, 2.5):
        p = rtr.RefinedParams(b, 0.5, 200)
        lap = rtr.termwise_inverse_laplace(rtr.omega_half_1_form(p))
        for L in (1.0, 3.0, 7.0):
            got = math.sqrt(1 + b) * lap.value(L)
            assert abs(got - b * L * v_half_1_aux(L)) < 1e-11 * max(1.0, abs(got))


def test_principal_parts_of_g_match_contour():
    p = rtr.RefinedParams(1.0, 0.3, 80)
    f = lambda z: _g_complex(z, 0.3, 80)
    for t in (-3, 2, 4):
        pp = rtr.g_jet(rtr.Centre.lattice(t), p).principal()
        assert abs(pp.get(1, 0.0) - _contour_coeff(f, t / 2, 1)) < 1e-9


# ---------------------------------------------------------------------------
# omega_{1/2,2}


@given(st.floats(0.05, 1.4), st.floats(0.05, 1.4))
def test_half_two_symmetric(z1, z2):
    def ok(z):
        return abs(2 * z - round(2 * z)) > 0.03
    if not (ok(z1) and ok(z2) and abs(z1 - z2) > 0.03 and abs(z1 + z2 - round(z1 + z2)) > 0.03):
        return
    a = rtr.omega_half_2_closed(z1, z2, P)
    b = rtr.omega_half_2_closed(z2, z1, P)
    assert abs(a - b) < 1e-11 * max(1.0, abs(a))


def test_half_two_bounded_near_diagonal():
    vals = [rtr.omega_half_2_closed(0.3 + h, 0.3, P) for h in (1e-2, 1e-3, 1e-4)]
    assert max(abs(v) for v in vals) < 1e3
    assert abs(vals[1] - vals[2]) < 1e-2 * abs(vals[2])


def test_half_two_pole_structure():
    # third-order pole on the anti-diagonal
    a = [rtr.omega_half_2_closed(0.3, -0.3 + h, P) * h ** 3 for h in (1e-3, 1e-4)]
    assert abs(a[0] - a[1]) < 1e-2 * abs(a[1]) and abs(a[1]) > 1.0
    # regular at positive lattice points, double poles at negative ones
    for t in (1, 2):
        v = [rtr.omega_half_2_closed(t / 2 + h, 0.3, P) for h in (1e-3, 1e-4, -1e-4)]
        assert abs(v[1] - v[2]) < 1e-2 * max(1.0, abs(v[1]))
        w = [rtr.omega_half_2_closed(-t / 2 + h, 0.3, P) * h * h for h in (1e-3, 1e-4)]
        assert abs(w[0] - w[1]) < 1e-2 * abs(w[1])


def test_recompute_half_two_matches_closed_form():
    samples = ((0.31, 0.47), (0.12, 0.83), (-0.2, 0.66), (0.71, -0.38), (1.13, 0.27))
    for r in rtr.rtr_recursion_recompute(0.5, 2, P, samples):
        want = rtr.omega_half_2_closed(*r.sample, P)
        assert abs(r.value - want) < 1e-10 * abs(want)


def test_recompute_half_two_converges_in_K():
    s = ((0.31, 0.47),)
    a = rtr.rtr_recursion_recompute(0.5, 2, rtr.RefinedParams(1.0, 0.5, 100), s)[0].value
    b = rtr.rtr_recursion_recompute(0.5, 2, rtr.RefinedParams(1.0, 0.5, 200), s)[0].value
    assert abs(a - b) < 1e-10 * abs(b)


def test_half_two_is_linear_in_bb():
    s = ((0.31, 0.47),)
    pts = []
    for b in (0.5, 1.0, 2.0, 4.0):
        p = rtr.RefinedParams(b, 0.5, 150)
        pts.append((p.bb, rtr.rtr_recursion_recompute(0.5, 2, p, s)[0].value))
    x, y = np.array(pts).T
    coef = np.polyfit(x, y, 2)
    assert abs(coef[0]) < 1e-9 * np.max(np.abs(y))
    assert abs(np.polyval(coef, 0.0)) < 1e-9 * np.max(np.abs(y))


def test_half_two_form_matches_closed_evaluation():
    form = rtr.omega_half_2_form(P)
    for z1, z2 in ((0.31, 0.47), (0.71, -0.38)):
        want = rtr.omega_half_2_closed(z1, z2, P)
        assert abs(form.value(z1, z2) - want) < 1e-10 * abs(want)


# ---------------------------------------------------------------------------
# omega_{1,1}


@pytest.fixture(scope="module")
def recomputed_11():
    return rtr.rtr_recursion_recompute(1, 1, P, (0.31, 0.12, -0.41, 0.77, 1.23))


def test_recompute_one_one_coefficients(recomputed_11):
    closed = rtr.omega_1_1_closed(P)
    lat = recomputed_11[0].lattice.poles
    scale: dict[int, float] = {}
    for (t, _), c in closed.poles.items():
        scale[t] = max(scale.get(t, 0.0), abs(c))
    for key in set(lat) | set(closed.poles):
        assert abs(lat.get(key, 0.0) - closed.poles.get(key, 0.0)) < 1e-10 * scale[key[0]]


def test_recompute_one_one_point_part(recomputed_11):
    closed = rtr.omega_1_1_closed(P)
    for r in recomputed_11:
        want = closed.pieces[0].value(r.sample[0])
        assert abs(r.point_part - want) < 1e-10 * abs(want)
        assert r.value is None


def test_one_one_positive_poles_cancel():
    d = rtr.omega_1_1_closed(rtr.RefinedParams(1.0, 0.5, 60))
    for t in range(1, 20):
        assert all(abs(c) < 1e-12 for c in d.principal(t).values())
    for t in range(-20, 1):
        assert abs(d.principal(t).get(1, 0.0)) < 1e-12


def test_one_one_bb_degree():
    # the lattice coefficients are bb^2 times eps-dependent constants
    for b in (0.5, 2.0):
        p = rtr.RefinedParams(b, 0.5, 30)
        d = rtr.omega_1_1_closed(p)
        q = rtr.RefinedParams(1.0, 0.5, 30)
        ref = rtr.omega_1_1_closed(q)
        ratio = p.bb ** 2 / q.bb ** 2
        for key in ((3, 3), (-3, 2), (5, 2)):
            assert abs(d.poles[key] - ratio * ref.poles[key]) < 1e-12 * abs(d.poles[key])


def test_c_coeff_raw_form_agrees():
    for k in (1, 2, 5, 13):
        for eps in (0.2, 0.5, 1.5):
            ct = rtr.ctilde_coeff(k, eps, 400)
            c = rtr.c_coeff(k, eps)
            assert abs(ct.value - c) < 1e-11 * max(1.0, abs(c))


def test_u_relation():
    for k in range(1, 25):
        assert rtr.u_relation_residual(k, 0.5) < 1e-12
        c = rtr.c_coeff(k, 0.5)
        assert abs(2 * c - (-1) ** k * u_coeff(k, 0.5)) < 1e-12 * max(1.0, abs(c))


# ---------------------------------------------------------------------------
# eta projection


@pytest.mark.parametrize("a,k,z1", [(0.3, 0, 0.7), (0.3, 2, 0.7), (-0.45, 3, 0.21), (1.2, 1, -0.6)])
def test_eta_projection_vs_contour(a, k, z1):
    eta = lambda z: 1 / (z1 - z) - 1 / (z1 + z)
    want = _contour_coeff(lambda z: eta(z) / (z - a) ** (k + 1), a, 1, r=0.05)
    assert abs(rtr.eta_projection(a, k, z1) - want) < 1e-10 * max(1.0, abs(want))


# ---------------------------------------------------------------------------
# Laplace dictionary


@pytest.mark.parametrize("b", [1.0, 0.5, 0.25])
@pytest.mark.parametrize("lengths", [(3.0, 2.0), (2.0, 3.0), (2.5, 2.5), (1.0, 1.0)])
def test_dictionary_half_two(lengths, b):
    chk = rtr.check_dictionary_chi1(T_HALF2, lengths, 0.5, b)
    assert chk.residual < 1e-8 * max(1.0, abs(chk.volume_side))
    assert abs(chk.resummed - chk.volume_side) < 1e-10 * max(1.0, abs(chk.volume_side))


@pytest.mark.parametrize("b", [1.0, 0.5, 0.25])
@pytest.mark.parametrize("L", [1.5, 3.0, 6.0])
def test_dictionary_one_one(L, b):
    chk = rtr.check_dictionary_chi1(T11, (L,), 0.5, b)
    assert chk.residual < 1e-8 * max(1.0, abs(chk.volume_side))
    assert abs(chk.resummed - chk.volume_side) < 1e-10 * max(1.0, abs(chk.volume_side))


def test_laplace_provenance():
    assert rtr.LaplaceSum.provenance((4, 1)) == "pole of order 2 at z=-2"


def test_wrong_ordering_raises():
    lap = rtr.inverse_laplace_bidifferential(rtr.omega_half_2_form(P), "L1>=L2")
    with pytest.raises(DomainError):
        lap.value(1.0, 2.0)
    with pytest.raises(DomainError):
        rtr.inverse_laplace_bidifferential(rtr.omega_half_2_form(P), "L1<L2")


def test_surviving_positive_pole_raises():
    d = rtr.DifferentialSum({}, (), 4)
    d.add_pole(-2, 2, 1.0)
    d.add_pole(2, 2, 1.0)
    with pytest.raises(DomainError):
        rtr.termwise_inverse_laplace(d)


def test_pole_terms_transform_exactly():
    d = rtr.DifferentialSum({}, (), 4)
    d.add_pole(0, 3, 2.0)
    d.add_pole(-2, 1, 0.5)
    lap = rtr.termwise_inverse_laplace(d)
    for L in (0.7, 2.0):
        assert abs(lap.value(L) - (L * L + 0.5 * math.exp(-L))) < 1e-14


@pytest.mark.parametrize("order", ["L1>=L2", "L2>=L1"])
def test_toy_antidiagonal_exact(order):
    expr, (L1, L2) = rtr.toy_antidiagonal(order)
    big = L1 if order == "L1>=L2" else L2
    assert sympy.simplify(expr - L1 * L2 * big / 4) == 0


# ---------------------------------------------------------------------------
# domain errors


def test_domain_errors():
    with pytest.raises(DomainError):
        rtr.RefinedParams(-1.0, 0.5)
    with pytest.raises(DomainError):
        rtr.RefinedParams(1.0, 0.5, 0)
    with pytest.raises(DomainError):
        rtr.omega_half_1(0.5, P)
    with pytest.raises(DomainError):
        rtr.omega_half_2_closed(0.3, 0.3, P)
    with pytest.raises(DomainError):
        rtr.rtr_recursion_recompute(0.5, 2, P, ((0.3, -0.3),))
    with pytest.raises(DomainError):
        rtr.rtr_recursion_recompute(0, 4, P, ((0.3, 0.4),))
    with pytest.raises(DomainError):
        rtr.check_dictionary_chi1(Topology(0, 4), (1.0, 1.0, 1.0, 1.0), 0.5, 1.0)
    with pytest.raises(DomainError):
        rtr.c_coeff(0, 0.5)
    with pytest.raises(DomainError):
        rtr.ctilde_coeff(3, 0.5, 4)
