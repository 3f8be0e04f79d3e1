"""Refined topological recursion on the curve x = z^2/2, y = -sin(2 pi z)/(2 pi).

Contents:

* the initial data omega_{1/2,1} and its parity split,
* the closed-form correlators at Euler characteristic -1, carried as
  structured pole sums (:class:`DifferentialSum`, :class:`Bidifferential`),
* an independent recomputation of those correlators from the recursion
  formula, using truncated Laurent jets for every residue,
* the termwise inverse Laplace transform (:class:`LaplaceSum`,
  :class:`LaplaceSum2`) and the checks against the volumes.

Differentials are represented by their coefficient functions with respect to
dz (or dz1 dz2).  ``z -> -z`` acts on coefficient functions, so for a
differential the pull-back gives ``f(z) dz -> -f(-z) dz``.

The residue sum of the recursion pairs each lattice point a = k/2 with -a via
Res_a F - Res_{-a} F = Res_a [F(z) + F(-z)].  Only the parity-odd part of
Rec/(4 omega_{0,1}) survives there.  This pairing is an exact change of
variables, and it avoids subtracting two residues of size e^{k eps} that
cancel to O(1).
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .chi1 import T11, T_HALF2, Topology, total_chi1, u_coeff
from .errors import ConvergenceError, DomainError
from .jets import Centre, Jet, ParityJet, PoleSum, cot2pi, exponential, monomial, sin2pi
from .kernels import RegEps, as_eps
from .specfun import alternating_sum

PI = math.pi
_HI = 10          # jet window above the centre
_GUARD = 40.0     # extra e-folds of the omega_{1/2,1} series kept beyond K


@dataclass(frozen=True)
class RefinedParams:
    """b >= 0, the regularisation eps and the lattice truncation K."""

    b: float
    eps: RegEps
    K: int = 200

    def __post_init__(self) -> None:
        b = float(self.b)
        if not (math.isfinite(b) and b >= 0):
            raise DomainError("b must be finite and non-negative")
        if int(self.K) != self.K or self.K < 1:
            raise DomainError("K must be a positive integer")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "eps", as_eps(self.eps))
        object.__setattr__(self, "K", int(self.K))

    @property
    def bb(self) -> float:
        """The refinement parameter -b/sqrt(1+b)."""
        return -self.b / math.sqrt(1.0 + self.b)

    @property
    def series_terms(self) -> int:
        """Terms of the omega_{1/2,1} series used inside jets.

        A jet at k/2 sees the neighbouring terms j > k with weight e^{-(j-k) eps},
        so the series runs a fixed number of e-folds past K.
        """
        return self.K + math.ceil(_GUARD / self.eps.eps)

    @property
    def series_tail(self) -> float:
        """Bound on the omitted part of the omega_{1/2,1} series near |z| <= 1."""
        e = self.eps.eps
        return 4.0 * math.exp(-self.K * e) / (1.0 - math.exp(-e))


def _params(p) -> RefinedParams:
    if not isinstance(p, RefinedParams):
        raise DomainError("expected RefinedParams")
    return p


def _off_lattice(z: float, what: str = "z") -> float:
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"{what} must be finite")
    if abs(2 * z - round(2 * z)) < 1e-12:
        raise DomainError(f"{what}={z} lies on the pole lattice")
    return z


# ---------------------------------------------------------------------------
# scalar building blocks


def _g(z: float, eps: float, K: int) -> float:
    """Even exponential part: sinh(2 eps z)/z + sum_k [...]; omega_{1/2,1} = (bb/2)(-2 pi cot + g)."""
    if abs(z) < 1e-4:
        w = 2 * eps * z
        head = 2 * eps * (1 + w * w / 6 + w ** 4 / 120)
    else:
        head = math.sinh(2 * eps * z) / z
    k = np.arange(1, K + 1, dtype=float)
    s = np.exp(2 * (z - k / 2) * eps) / (z - k / 2) - np.exp(-2 * (z + k / 2) * eps) / (z + k / 2)
    return head + math.fsum(s)


def _g_prime(z: float, eps: float, K: int) -> float:
    if abs(z) < 1e-4:
        w = 2 * eps
        head = w ** 3 * z / 3 + w ** 5 * z ** 3 / 30
    else:
        head = (2 * eps * z * math.cosh(2 * eps * z) - math.sinh(2 * eps * z)) / (z * z)
    k = np.arange(1, K + 1, dtype=float)
    u, v = z - k / 2, z + k / 2
    s = (np.exp(2 * u * eps) * (2 * eps / u - 1 / u ** 2)
         + np.exp(-2 * v * eps) * (2 * eps / v + 1 / v ** 2))
    return head + math.fsum(s)


def kernel_B(z: float) -> float:
    """1/(4 omega_{0,1}) per 1/dz, i.e. -pi/(2 z sin 2 pi z)."""
    return -PI / (2 * z * math.sin(2 * PI * z))


def kernel_B_prime(z: float) -> float:
    return -kernel_B(z) * (1 / z + 2 * PI / math.tan(2 * PI * z))


def eta(z: float, z1: float) -> float:
    """eta^z(z1) per dz1: the integral of omega_{0,2}(z1, .) from -z to z."""
    return 1 / (z1 - z) - 1 / (z1 + z)


# ---------------------------------------------------------------------------
# jets of the building blocks


def _pole_series(a: Centre, twices: np.ndarray, weights: np.ndarray, hi: int) -> Jet:
    """Jet at a of sum_j w_j / (z - twices_j/2)."""
    if a.twice is not None:
        d = (a.twice - twices) / 2.0
    else:
        d = a.value - twices / 2.0
    hit = d == 0.0
    dn = d[~hit]
    wn = weights[~hit]
    n = max(hi, 0)
    c = np.zeros(n)
    if dn.size:
        inv = 1.0 / dn
        pw = wn * inv
        for k in range(n):
            c[k] = (-1) ** k * math.fsum(pw)
            pw = pw * inv
    out = Jet(0, c)
    if hit.any() and hi > -1:
        extra = np.zeros(hi + 1)
        extra[0] = float(weights[hit].sum())
        out = out + Jet(-1, extra)
    return out


def g_jet(a: Centre, p: RefinedParams, hi: int = _HI) -> Jet:
    e = p.eps.eps
    if a.twice == 0:
        w = 2 * e
        c = np.zeros(max(hi, 0))
        for n in range(0, len(c), 2):
            c[n] = w ** (n + 1) / math.factorial(n + 1)
        head = Jet(0, c)
    else:
        half = (exponential(a, 2 * e, hi) - exponential(a, -2 * e, hi)) * 0.5
        head = half * _pole_series(a, np.array([0]), np.array([1.0]), hi)
    k = np.arange(1, p.series_terms + 1)
    w = np.exp(-k * e)
    plus = exponential(a, 2 * e, hi) * _pole_series(a, k, w, hi)
    minus = exponential(a, -2 * e, hi) * _pole_series(a, -k, w, hi)
    return head + plus - minus


def B_jet(a: Centre, hi: int = _HI) -> Jet:
    """Jet of 1/(4 omega_{0,1}) = -pi/(2 z sin 2 pi z)."""
    zs = monomial(a, hi + 4) * sin2pi(a, hi + 4)
    return (zs.reciprocal() * (-PI / 2)).truncate(hi)


def f_parity(a: Centre, p: RefinedParams, hi: int = _HI) -> ParityJet:
    """omega_{1/2,1} split into its even (exponential) and odd (cotangent) parts."""
    half = p.bb / 2
    return ParityJet(g_jet(a, p, hi) * half, cot2pi(a, hi) * (-2 * PI * half))


# ---------------------------------------------------------------------------
# structured differentials


class Piece:
    """An analytic piece of a differential that is not a finite pole sum."""

    name = "piece"

    def value(self, z: float) -> float:
        raise NotImplementedError

    def jet(self, a: Centre, hi: int) -> Jet:
        raise NotImplementedError

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class CotPiece(Piece):
    """coef * cot(2 pi z); with coef = -pi*bb this is (bb/2)(-dy/y)."""

    coef: float
    name = "cot"

    def value(self, z):
        return self.coef / math.tan(2 * PI * z)

    def jet(self, a, hi):
        return cot2pi(a, hi) * self.coef

    def render(self):
        return f"{self.coef:.12g}*cot(2*pi*z)"


@dataclass(frozen=True)
class ExpPolePiece(Piece):
    """coef * g(z), the even series of exponential poles truncated at K."""

    coef: float
    p: RefinedParams
    name = "exp-poles"

    def value(self, z):
        return self.coef * _g(z, self.p.eps.eps, self.p.K)

    def jet(self, a, hi):
        return g_jet(a, self.p, hi) * self.coef

    def render(self):
        return (f"{self.coef:.12g}*[sinh(2*eps*z)/z + sum_k (e^(2(z-k/2)eps)/(z-k/2)"
                f" - e^(-2(z+k/2)eps)/(z+k/2))], eps={self.p.eps.eps}, K={self.p.K}")


@dataclass(frozen=True)
class DerivativePiece(Piece):
    """coef * d/dz [g(z) / (4 y(z) x'(z))], the exact-derivative part of omega_{1,1}."""

    coef: float
    p: RefinedParams
    name = "derivative"

    def value(self, z):
        e, K = self.p.eps.eps, self.p.K
        return self.coef * (_g_prime(z, e, K) * kernel_B(z) + _g(z, e, K) * kernel_B_prime(z))

    def jet(self, a, hi):
        return (g_jet(a, self.p, hi + 1) * B_jet(a, hi + 1)).deriv() * self.coef

    def render(self):
        return f"{self.coef:.12g}*d/dz[g(z)*(-pi/(2 z sin 2 pi z))], eps={self.p.eps.eps}, K={self.p.K}"


@dataclass
class DifferentialSum:
    """A one-variable differential: lattice pole terms plus analytic pieces.

    ``poles`` maps (twice the centre, order) to the coefficient of
    dz/(z - centre)^order.  Values at a point are only meaningful when the
    lattice sum converges there; :meth:`value` checks this.
    """

    poles: dict[tuple[int, int], float] = field(default_factory=dict)
    pieces: tuple[Piece, ...] = ()
    K: int = 0

    def add_pole(self, twice: int, order: int, coef: float) -> None:
        if coef != 0.0:
            key = (int(twice), int(order))
            self.poles[key] = self.poles.get(key, 0.0) + float(coef)

    def pole_value(self, z: float, kmax: int | None = None) -> float:
        terms = [c / (z - t / 2) ** m for (t, m), c in self.poles.items()
                 if kmax is None or abs(t) <= kmax]
        return math.fsum(terms)

    def value(self, z: float) -> float:
        z = _off_lattice(z)
        full = self.pole_value(z)
        edge = [c / (z - t / 2) ** m for (t, m), c in self.poles.items() if abs(t) >= max(self.K - 1, 1)]
        if edge and max(abs(x) for x in edge) > 1e-10 * max(1.0, abs(full)):
            raise ConvergenceError("lattice pole sum does not converge at this point; "
                                   "compare coefficients or the Laplace image instead")
        return full + math.fsum(pc.value(z) for pc in self.pieces)

    def principal(self, twice: int, hi: int = _HI) -> dict[int, float]:
        """Principal part (order -> coefficient) at the lattice point twice/2."""
        out: dict[int, float] = defaultdict(float)
        for (t, m), c in self.poles.items():
            if t == twice:
                out[m] += c
        a = Centre.lattice(twice)
        for pc in self.pieces:
            for m, c in pc.jet(a, hi).principal().items():
                out[m] += c
        return dict(out)

    def render(self) -> str:
        lines = []
        for (t, m), c in sorted(self.poles.items(), key=lambda kv: (abs(kv[0][0]), kv[0][0], -kv[0][1])):
            centre = "z" if t == 0 else (f"(z-{_half(t)})" if t > 0 else f"(z+{_half(-t)})")
            lines.append(f"{c:+.15g} dz/{centre}^{m}")
        lines.extend("+ " + pc.render() for pc in self.pieces)
        return "\n".join(lines)


def _half(t: int) -> str:
    return str(t // 2) if t % 2 == 0 else f"{t}/2"


# ---------------------------------------------------------------------------
# initial data


@dataclass(frozen=True)
class HalfOne:
    value: float
    form: DifferentialSum
    tail_bound: float


def omega_half_1_form(p: RefinedParams) -> DifferentialSum:
    p = _params(p)
    return DifferentialSum({}, (CotPiece(-PI * p.bb), ExpPolePiece(p.bb / 2, p)), p.K)


def omega_half_1(z: float, p: RefinedParams) -> HalfOne:
    """omega_{1/2,1} per dz at z, with its structured form."""
    p = _params(p)
    z = _off_lattice(z)
    form = omega_half_1_form(p)
    return HalfOne(form.value(z), form, abs(p.bb) / 2 * p.series_tail)


def residue_spectrum(p: RefinedParams, kmax: int | None = None) -> dict[int, float]:
    """Residues of omega_{1/2,1} at the lattice points twice/2, read from jets."""
    p = _params(p)
    kmax = p.K if kmax is None else kmax
    form = omega_half_1_form(p)
    return {t: form.principal(t).get(1, 0.0) for t in range(-kmax, kmax + 1)}


def delta_omega_half_1(z: float, p: RefinedParams) -> float:
    """omega_{1/2,1}(z) minus its pull-back under z -> -z, per dz: bb * g(z)."""
    p = _params(p)
    return p.bb * _g(_off_lattice(z), p.eps.eps, p.K)


def varpi_half_1(z: float, p: RefinedParams) -> float:
    """The companion differential e^{-2 eps z}/(2z) + sum_k e^{-2(z+k/2)eps}/(z+k/2)."""
    p = _params(p)
    z = _off_lattice(z)
    e = p.eps.eps
    k = np.arange(1, p.K + 1, dtype=float)
    return math.exp(-2 * e * z) / (2 * z) + math.fsum(np.exp(-2 * (z + k / 2) * e) / (z + k / 2))


# ---------------------------------------------------------------------------
# closed forms at Euler characteristic -1


def _A(u: float, v: float) -> float:
    return 1 / (u + v) ** 2 + 1 / (u - v) ** 2


def _A_prime(u: float, v: float) -> float:
    return -2 / (u + v) ** 3 - 2 / (u - v) ** 3


def _lattice_pair(z: float, k: np.ndarray) -> np.ndarray:
    return 1 / (z - k / 2) ** 2 + 1 / (z + k / 2) ** 2


def omega_half_2_closed(z1: float, z2: float, p: RefinedParams) -> float:
    """omega_{1/2,2} per dz1 dz2 from its explicit four-piece form."""
    p = _params(p)
    z1, z2 = _off_lattice(z1, "z1"), _off_lattice(z2, "z2")
    if z1 == z2 or z1 == -z2:
        raise DomainError("closed form is evaluated off the diagonals")
    bb = p.bb
    l2s = p.eps.log_two_sinh_half
    t0 = 2 * bb * l2s / (z1 * z1 * z2 * z2)

    def dpiece(u, v):
        return _A_prime(u, v) * kernel_B(u) + _A(u, v) * kernel_B_prime(u)

    k = np.arange(1, p.K + 1, dtype=float)
    sgn = np.where(k % 2 == 0, 1.0, -1.0)
    t3 = bb / 2 * math.fsum(sgn / k * _lattice_pair(z1, k) * _lattice_pair(z2, k))
    return t0 - bb * dpiece(z1, z2) - bb * dpiece(z2, z1) + t3


def c_coeff(k: int, eps) -> float:
    """Finite closed form of the second-order lattice coefficient of omega_{1,1}."""
    k = _pos_int(k)
    e = as_eps(eps)
    s = (-1) ** k
    inner = math.fsum((math.exp(m * e.eps) + math.exp(-m * e.eps)) / m for m in range(1, k))
    return (2 * s / k * e.log_two_sinh_half - s / k ** 2
            + s / (2 * k ** 2) * (math.exp(k * e.eps) + math.exp(-k * e.eps)) + s / k * inner)


@dataclass(frozen=True)
class CTilde:
    value: float
    tail_bound: float


def ctilde_coeff(k: int, eps, K: int = 400) -> CTilde:
    """The same coefficient in the raw form produced by expanding at z = k/2.

    The alternating i-sum is summed by averaging partial sums; the geometric
    j-sum is truncated at K and its tail bounded.
    """
    k = _pos_int(k)
    e = as_eps(eps).eps
    if K <= k + 1:
        raise DomainError("K must exceed k + 1")
    s = (-1) ** k
    head = (s / k * e - s / (2 * k * k) - s / (2 * k * k) * math.exp(-2 * e * k) + 1 / k ** 2
            + s / 2 * (math.exp(e * k) - math.exp(-e * k)) / k ** 2)
    isum = alternating_sum([(-1) ** i / ((i - k) * (k + i)) for i in range(1, K + 1) if i != k])
    jsum = math.fsum(math.exp(-(j + k) * e) / (k * (j + k)) + math.exp(-(j - k) * e) / (k * (j - k))
                     for j in range(1, K + 1) if j != k)
    tail = 2 * math.exp(-(K + 1 - k) * e) / (k * (K + 1 - k) * (1 - math.exp(-e)))
    return CTilde(head - 2 * isum - s * jsum, tail + 1e-15 * abs(head))


def _pos_int(k) -> int:
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    return int(k)


def omega_1_1_closed(p: RefinedParams) -> DifferentialSum:
    """omega_{1,1} as origin poles, lattice poles and an exact-derivative piece."""
    p = _params(p)
    bb2 = p.bb ** 2
    l2s = p.eps.log_two_sinh_half
    d = DifferentialSum({}, (DerivativePiece(-bb2, p),), p.K)
    lead = (1 + 5 * bb2) / 8
    d.add_pole(0, 4, lead)
    d.add_pole(0, 2, lead * 2 * PI ** 2 / 3 - bb2 * (PI ** 2 / 3 - 2 * l2s * l2s))
    for k in range(1, p.K + 1):
        s = (-1) ** k / k
        ck = c_coeff(k, p.eps)
        d.add_pole(k, 3, bb2 * s)
        d.add_pole(-k, 3, -bb2 * s)
        d.add_pole(k, 2, bb2 * ck)
        d.add_pole(-k, 2, bb2 * ck)
    return d


# ---------------------------------------------------------------------------
# recursion


def _eta_poles(z0: Centre) -> PoleSum:
    return PoleSum({(z0, 1): -1.0, (-z0, 1): -1.0})


_ORIGIN = Centre.lattice(0)


def _inv_z(a: Centre, hi: int) -> ParityJet:
    return ParityJet.of_odd(PoleSum.single(_ORIGIN, 1).jet(a, hi))


def _rec_half_2(z1: Centre, p: RefinedParams) -> Callable[[Centre, int], ParityJet]:
    """Rec for omega_{1/2,2}(z0, z1) as a function of the integration variable."""
    w02 = PoleSum.single(-z1, 2)                                   # dz dz1/(z+z1)^2
    dxdx = PoleSum.single(z1, 2) - PoleSum.single(-z1, 2)          # dx dx1/(x-x1)^2

    def rec(a: Centre, hi: int) -> ParityJet:
        f = f_parity(a, p, hi)
        first = f * ParityJet.of_poles(w02 * 2.0 + dxdx, a, hi)
        zj = ParityJet.of_odd(monomial(a, hi))
        second = zj * (ParityJet.of_poles(w02, a, hi) * _inv_z(a, hi)).deriv() * p.bb
        return first + second

    return rec


def _rec_1_1(p: RefinedParams) -> Callable[[Centre, int], ParityJet]:
    w = PoleSum.single(_ORIGIN, 2, 0.25)                           # omega_{0,2}(z, z)

    def rec(a: Centre, hi: int) -> ParityJet:
        f = f_parity(a, p, hi)
        zj = ParityJet.of_odd(monomial(a, hi))
        return f * f + ParityJet.of_poles(w, a, hi) + zj * (f * _inv_z(a, hi)).deriv() * p.bb

    return rec


@dataclass
class Recomputed:
    """One sample of a recomputed correlator.

    ``lattice`` holds the terms produced at z = 0 and z = +-k/2 as a
    DifferentialSum in the output variable; ``point_part`` is the sum of the
    residues at the sample points, evaluated at the output point.
    """

    sample: tuple[float, ...]
    lattice: DifferentialSum
    point_part: float
    value: float | None


def _phi(rec, a: Centre, hi: int) -> ParityJet:
    out = rec(a, hi) * B_jet(a, hi)
    if out.even.hi < 1 or out.odd.hi < 1:
        raise ConvergenceError("jet window too small for the recursion kernel")
    return out


def _recursion(rec, z0: Centre, points: Sequence[Centre], p: RefinedParams,
               hi: int = _HI) -> tuple[DifferentialSum, float]:
    lattice = DifferentialSum({}, (), p.K)
    for k in range(1, p.K + 1):
        a = Centre.lattice(k)
        psi = _phi(rec, a, hi).odd * 2.0
        for m, c in psi.principal().items():
            lattice.add_pole(k, m, c)
            lattice.add_pole(-k, m, -((-1) ** (m - 1)) * c)
    psi0 = _phi(rec, _ORIGIN, hi).even
    for m, c in psi0.principal().items():
        lattice.add_pole(0, m, -c * (1 + (-1) ** m))
    eta = _eta_poles(z0)
    total = 0.0
    for a in points:
        phi = _phi(rec, a, hi)
        total += 2.0 * (eta.jet(a, hi) * phi.odd).residue()
    return lattice, total


def rtr_recursion_recompute(g, n: int, p: RefinedParams, samples: Iterable) -> list[Recomputed]:
    """Run the recursion formula for (g, n) in {(1/2, 2), (1, 1)} at sample points.

    For (1/2,2) a sample is (z0, z1) and ``value`` is the full correlator.  For
    (1,1) a sample is z0; the lattice coefficients grow like e^{k eps}, so
    ``value`` is None and comparisons go through the structured parts.
    """
    p = _params(p)
    top = Topology.of(g, n)
    out = []
    if top == T_HALF2:
        for s in samples:
            z0, z1 = (_off_lattice(v, "sample") for v in s)
            if abs(abs(z0) - abs(z1)) < 1e-9:
                raise DomainError("sample points must not coincide up to sign")
            c0, c1 = Centre.point(z0), Centre.point(z1)
            lat, pts = _recursion(_rec_half_2(c1, p), c0, [c0, c1], p)
            out.append(Recomputed((z0, z1), lat, pts, lat.pole_value(z0) + pts))
    elif top == T11:
        rec = _rec_1_1(p)
        lat = None
        for s in samples:
            z0 = _off_lattice(s if np.isscalar(s) else s[0], "sample")
            c0 = Centre.point(z0)
            if lat is None:
                lat, pts = _recursion(rec, c0, [c0], p)
            else:
                pts = 2.0 * (_eta_poles(c0).jet(c0, _HI) * _phi(rec, c0, _HI).odd).residue()
            out.append(Recomputed((z0,), lat, pts, None))
    else:
        raise DomainError(f"recursion recomputation is implemented for (1/2,2) and (1,1), not {top}")
    return out


def eta_projection(a: float, k: int, z1: float) -> float:
    """Res_{z=a} eta^z(z1) dz/(z-a)^{k+1}, computed from jets."""
    ca = Centre.point(a)
    j = _eta_poles(Centre.point(z1)).jet(ca, k + 2) * PoleSum.single(ca, k + 1).jet(ca, k + 2)
    return j.residue()


# ---------------------------------------------------------------------------
# termwise inverse Laplace transform


@dataclass
class LaplaceSum:
    """sum of coef * L^a * exp(-k L / 2); key (k, a).  The term with key (k, a)
    comes from the pole of order a+1 at z = -k/2."""

    terms: dict[tuple[int, int], float]
    K: int

    def value(self, L: float) -> float:
        L = float(L)
        vals = {key: c * L ** key[1] * math.exp(-key[0] * L / 2) for key, c in self.terms.items()}
        total = math.fsum(vals.values())
        edge = [abs(v) for (k, _), v in vals.items() if k >= max(self.K - 1, 1)]
        if edge and max(edge) > 1e-13 * max(1.0, abs(total)):
            raise ConvergenceError(f"Laplace series not converged at L={L} with K={self.K}")
        return total

    @staticmethod
    def provenance(key: tuple[int, int]) -> str:
        k, a = key
        return f"pole of order {a + 1} at z={-k / 2:g}"


def termwise_inverse_laplace(d: DifferentialSum, ordering=None, tol: float = 1e-9) -> LaplaceSum:
    """Residues of e^{zL} d at 0 and the negative lattice points.

    Poles at positive lattice points are outside the contour and must cancel;
    a surviving one raises DomainError.
    """
    if isinstance(d, Bidifferential):
        return inverse_laplace_bidifferential(d, ordering)
    if ordering is not None:
        raise DomainError("ordering applies to bidifferentials only")
    terms: dict[tuple[int, int], float] = defaultdict(float)
    for k in range(0, d.K + 1):
        neg = d.principal(-k)
        for m, c in neg.items():
            terms[(k, m - 1)] += c / math.factorial(m - 1)
        if k:
            pos = d.principal(k)
            scale = max([1.0] + [abs(c) for c in neg.values()])
            bad = {m: c for m, c in pos.items() if abs(c) > tol * scale}
            if bad:
                raise DomainError(f"pole at z={k / 2:g} survives with coefficients {bad}")
    return LaplaceSum(dict(terms), d.K)


# two variables


@dataclass(frozen=True)
class SeparablePoles:
    """coef * dz1/(z1 - t1/2)^m1 * dz2/(z2 - t2/2)^m2."""

    coef: float
    t1: int
    m1: int
    t2: int
    m2: int


@dataclass(frozen=True)
class AntiDiagonalKernel:
    """coef * (d_{z1}[A(z1;z2) B(z1)] + d_{z2}[A(z2;z1) B(z2)]),
    A(u;v) = 1/(u+v)^2 + 1/(u-v)^2, B = 1/(4 omega_{0,1})."""

    coef: float


@dataclass
class Bidifferential:
    separable: list[SeparablePoles]
    kernels: list[AntiDiagonalKernel]
    K: int

    def value(self, z1: float, z2: float) -> float:
        s = math.fsum(t.coef / ((z1 - t.t1 / 2) ** t.m1 * (z2 - t.t2 / 2) ** t.m2) for t in self.separable)
        for kern in self.kernels:
            for u, v in ((z1, z2), (z2, z1)):
                s += kern.coef * (_A_prime(u, v) * kernel_B(u) + _A(u, v) * kernel_B_prime(u))
        return s


def omega_half_2_form(p: RefinedParams) -> Bidifferential:
    p = _params(p)
    bb = p.bb
    sep = [SeparablePoles(2 * bb * p.eps.log_two_sinh_half, 0, 2, 0, 2)]
    for k in range(1, p.K + 1):
        c = bb / 2 * (-1) ** k / k
        for t1 in (k, -k):
            for t2 in (k, -k):
                sep.append(SeparablePoles(c, t1, 2, t2, 2))
    return Bidifferential(sep, [AntiDiagonalKernel(-bb)], p.K)


@dataclass
class LaplaceSum2:
    """sum of coef * L1^a1 L2^a2 exp(-(k1 L1 + k2 L2)/2); key (k1, k2, a1, a2).

    Valid on the ordering it was built for (``ordering`` = "L1>=L2" means the
    anti-diagonal contour choice of L1 >= L2).
    """

    terms: dict[tuple[int, int, int, int], float]
    K: int
    ordering: str

    def value(self, L1: float, L2: float) -> float:
        L1, L2 = float(L1), float(L2)
        if (self.ordering == "L1>=L2" and L1 < L2) or (self.ordering == "L2>=L1" and L2 < L1):
            raise DomainError(f"this transform was built for {self.ordering}")
        shells: dict[int, list[float]] = defaultdict(list)
        for (k1, k2, a1, a2), c in self.terms.items():
            shells[max(abs(k1), abs(k2))].append(
                c * L1 ** a1 * L2 ** a2 * math.exp(-(k1 * L1 + k2 * L2) / 2))
        seq = [math.fsum(shells.get(n, [])) for n in range(self.K + 1)]
        # at L1 = L2 the anti-diagonal family is an undamped alternating series
        total = alternating_sum(seq)
        check = alternating_sum(seq[: max(2, self.K - self.K // 4)])
        if abs(total - check) > 1e-10 * max(1.0, abs(total)):
            raise ConvergenceError("double Laplace series not converged; increase K")
        return total


def _binomial_poly(c1: int, c2: int, power: int) -> dict[tuple[int, int], float]:
    """(c1 L1 + c2 L2)^power as {(a1, a2): coef}."""
    return {(j, power - j): math.comb(power, j) * c1 ** j * c2 ** (power - j)
            for j in range(power + 1) if math.comb(power, j) * c1 ** j * c2 ** (power - j) != 0}


def inverse_laplace_bidifferential(w: Bidifferential, ordering=None) -> LaplaceSum2:
    """Double termwise inverse Laplace; inner transform in the shorter length.

    ``ordering`` is "L1>=L2" (default) or "L2>=L1".  For L1 >= L2 the inner
    transform is in z2 and its contour takes the anti-diagonal pole
    z2 = -z1; the other order exchanges the roles of the variables.
    """
    ordering = ordering or "L1>=L2"
    if ordering not in ("L1>=L2", "L2>=L1"):
        raise DomainError("ordering must be 'L1>=L2' or 'L2>=L1'")
    swap = ordering == "L2>=L1"
    T: dict[tuple[int, int, int, int], float] = defaultdict(float)

    def put(k1, k2, a1, a2, c):
        if swap:
            k1, k2, a1, a2 = k2, k1, a2, a1
        T[(k1, k2, a1, a2)] += c

    for t in w.separable:
        t1, m1, t2, m2 = (t.t2, t.m2, t.t1, t.m1) if swap else (t.t1, t.m1, t.t2, t.m2)
        if t1 <= 0 and t2 <= 0:
            put(-t1, -t2, m1 - 1, m2 - 1, t.coef / (math.factorial(m1 - 1) * math.factorial(m2 - 1)))

    bp = {q: B_jet(Centre.lattice(q)).principal() for q in range(0, -w.K - 1, -1)}
    for kern in w.kernels:
        c = kern.coef
        for q, b in bp.items():
            k = -q   # the exponent e^{(q/2) L} carries decay index -q
            # anti-diagonal pole z2 = -z1 of both terms: -2c L2 e^{-z1 L2}(B' - L2 B),
            # then Res_{z1=q/2} e^{z1 L1}: 2c' L1 L2 Res e^{z1 (L1-L2)} B with c' = -c
            for m, bm in b.items():
                for (a1, a2), bc in _binomial_poly(1, -1, m - 1).items():
                    put(k, -k, a1 + 1, a2 + 1, -2 * c * bm * bc / math.factorial(m - 1))
            # lattice poles of B(z2): -c * (-L2) * Res_{z2=q/2} e^{z2 L2} A(z2; z1) B(z2)
            for m, bm in b.items():
                n = m - 1
                for r in range(n + 1):
                    s = n - r
                    base = -c * bm / math.factorial(r)   # times L2^{r+1} e^{q L2 / 2}
                    # A_s = (s+1)/(z1 - q/2)^{s+2} + (-1)^s (s+1)/(z1 + q/2)^{s+2}
                    order = s + 2
                    outer = 1.0 / math.factorial(order - 1)
                    put(k, k, order - 1, r + 1, base * (s + 1) * outer)
                    if q == 0:
                        put(0, 0, order - 1, r + 1, base * (-1) ** s * (s + 1) * outer)
    return LaplaceSum2(dict(T), w.K, ordering)


# ---------------------------------------------------------------------------
# toy example for the anti-diagonal rule


def toy_antidiagonal(ordering: str = "L1>=L2"):
    """Exact double inverse Laplace of the rational toy bidifferential (sympy)."""
    import sympy as sp

    z1, z2 = sp.symbols("z1 z2")
    L1, L2 = sp.symbols("L1 L2", positive=True)
    w = (z1 ** 4 + 3 * z1 ** 3 * z2 + 3 * z1 ** 2 * z2 ** 2 + 3 * z1 * z2 ** 3 + z2 ** 4) / (
        2 * z1 ** 3 * z2 ** 3 * (z1 + z2) ** 3)
    if ordering == "L1>=L2":
        inner_v, inner_L, outer_v, outer_L = z2, L2, z1, L1
    elif ordering == "L2>=L1":
        inner_v, inner_L, outer_v, outer_L = z1, L1, z2, L2
    else:
        raise DomainError("ordering must be 'L1>=L2' or 'L2>=L1'")
    f = w * sp.exp(inner_v * inner_L)
    inner = sp.residue(f, inner_v, 0) + sp.residue(f, inner_v, -outer_v)
    outer = sp.residue(sp.simplify(inner) * sp.exp(outer_v * outer_L), outer_v, 0)
    return sp.factor(sp.simplify(outer)), (L1, L2)


# ---------------------------------------------------------------------------
# volume dictionary at chi = -1


@dataclass(frozen=True)
class DictionaryCheck:
    residual: float
    volume_side: float
    laplace_side: float
    resummed: float


def resummed_half_2(L1: float, L2: float, p: RefinedParams) -> float:
    """Closed sum of the double Laplace series of omega_{1/2,2}."""
    s = math.log(2 * math.cosh(L1 / 2) + 2 * math.cosh(L2 / 2))
    return -p.bb * L1 * L2 * (s - 2 * p.eps.log_two_sinh_half)


def resummed_1_1(L: float, p: RefinedParams) -> float:
    """Closed sum of the Laplace series of omega_{1,1}, times 1/L, for generic b."""
    from .specfun import dilog
    b = p.b
    base = L * L / 48 + PI ** 2 / 12
    arg = -math.cosh(L / 4) ** 2 / p.eps.sinh_half ** 2
    # (1+b)*bb^2 = b^2
    return ((1 + b) * base - b * b * (base + float(dilog(arg)))) / (1 + b)


def check_dictionary_chi1(top: Topology, lengths: Sequence[float], eps, b: float,
                          K: int = 200) -> DictionaryCheck:
    """|prod L_i V^{eps,b} - (1+b)^g * termwise inverse Laplace of omega|."""
    p = RefinedParams(b, eps, K)
    if top == T_HALF2:
        L1, L2 = (float(x) for x in lengths)
        if min(L1, L2) <= 0:
            raise DomainError("lengths must be positive")
        order = "L1>=L2" if L1 >= L2 else "L2>=L1"
        lap = inverse_laplace_bidifferential(omega_half_2_form(p), order).value(L1, L2)
        rhs = math.sqrt(1 + p.b) * lap
        lhs = L1 * L2 * total_chi1(top, [L1, L2], eps, b)
        res = math.sqrt(1 + p.b) * resummed_half_2(L1, L2, p)
    elif top == T11:
        (L,) = (float(x) for x in lengths)
        if not L > 2 * p.eps.eps:
            raise DomainError("the termwise series converges for L > 2 eps only")
        lap = termwise_inverse_laplace(omega_1_1_closed(p)).value(L)
        rhs = (1 + p.b) * lap
        lhs = L * total_chi1(top, [L], eps, b)
        res = (1 + p.b) * L * resummed_1_1(L, p)
    else:
        raise DomainError(f"dictionary check is implemented for (1/2,2) and (1,1), not {top}")
    return DictionaryCheck(abs(lhs - rhs), lhs, rhs, res)


def u_relation_residual(k: int, eps) -> float:
    """|2 C_k - (-1)^k U_k| relative to |C_k|."""
    c = c_coeff(k, eps)
    return abs(2 * c - (-1) ** k * u_coeff(k, eps)) / max(1.0, abs(c))
