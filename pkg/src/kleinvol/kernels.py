"""Gluing kernels R, D, E, F, the regularised kernel Ecal and the bound Lambda.

All double-precision kernels accept scalars or numpy arrays and broadcast.
They are written in log-sum-exp form so nothing overflows out to lengths of a
few thousand, and in the tail region (third argument beyond the first two)
the small result is computed directly rather than as a difference of two
large logarithms.  The ``*_mp`` variants evaluate the same formulas in the
current mpmath context for the extended-precision tier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainError
from .specfun import log_sum_cosh, log_two_sinh_half, logcosh

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class RegEps:
    """Regularisation scale; requires 0 < eps and sinh(eps/2) <= 1."""

    eps: float

    def __post_init__(self) -> None:
        e = float(self.eps)
        if not (e > 0 and math.isfinite(e)):
            raise DomainError(f"eps must be positive, got {self.eps}")
        if math.sinh(e / 2) > 1.0 + 1e-15:
            raise DomainError(f"eps={e} violates sinh(eps/2) <= 1")
        object.__setattr__(self, "eps", e)

    @property
    def sinh_half(self) -> float:
        return math.sinh(self.eps / 2)

    @property
    def log_sinh_half(self) -> float:
        return log_two_sinh_half(self.eps) - LOG2

    @property
    def log_two_sinh_half(self) -> float:
        return log_two_sinh_half(self.eps)


EPS_MAX = 2 * math.asinh(1.0)


def as_eps(eps) -> RegEps:
    return eps if isinstance(eps, RegEps) else RegEps(eps)


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def _check_lengths(*args):
    arrs = [np.asarray(a, dtype=float) for a in args]
    for a in arrs:
        if np.any(~np.isfinite(a)):
            raise DomainError("kernel arguments must be finite")
        if np.any(a < 0):
            raise DomainError("kernel arguments must be non-negative")
    return arrs


def kernel_R(x, y, z):
    """R(x,y,z) = x - log[(cosh(y/2)+cosh((x+z)/2)) / (cosh(y/2)+cosh((x-z)/2))]."""
    x, y, z = _check_lengths(x, y, z)
    x, y, z = np.broadcast_arrays(x, y, z)
    direct = x - (log_sum_cosh(y / 2, (x + z) / 2) - log_sum_cosh(y / 2, (x - z) / 2))
    # tail form: exact rewrite after dividing through by e^{(x+z)/2}
    with np.errstate(over="ignore"):
        up = np.exp((x + y - z) / 2) + np.exp((x - y - z) / 2) + np.exp(x - z)
        dn = np.exp((y - x - z) / 2) + np.exp(-(x + y + z) / 2) + np.exp(-x - z)
        tail = np.log1p(up) - np.log1p(dn)
    return _out(np.where(z > x + y, tail, direct))


def kernel_D(x, y, z):
    """D(x,y,z) = R(x,y,z) + R(x,z,y) - x.

    Evaluated through the equivalent single-log form
    2 log[(e^{x/2} + e^{(y+z)/2}) / (e^{-x/2} + e^{(y+z)/2})], which depends on
    y and z only through y+z, so the y<->z symmetry is exact in floating point.
    """
    x, y, z = _check_lengths(x, y, z)
    x, y, z = np.broadcast_arrays(x, y, z)
    s = 0.5 * (y + z)
    h = 0.5 * x
    far = 2.0 * (np.log1p(np.exp(np.minimum(h - s, 0.0))) - np.log1p(np.exp(-h - s)))
    near = 2.0 * (h - s + np.log1p(np.exp(np.minimum(s - h, 0.0))) - np.log1p(np.exp(-h - s)))
    return _out(np.where(s >= h, far, near))


def kernel_D_composed(x, y, z):
    """R(x,y,z) + R(x,z,y) - x evaluated literally (used as a cross-check)."""
    return _out(np.asarray(kernel_R(x, y, z)) + np.asarray(kernel_R(x, z, y)) - np.asarray(x, dtype=float))


def kernel_E(x, y, z):
    """E(x,y,z) = R(x, 2z, y) - x/2."""
    x, y, z = _check_lengths(x, y, z)
    return _out(np.asarray(kernel_R(x, 2 * z, y)) - x / 2)


def _log_sinh(a):
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore"):
        return a + np.log(-np.expm1(-2 * a)) - LOG2


def _lse(*terms):
    t = np.stack(np.broadcast_arrays(*terms))
    m = t.max(axis=0)
    return m + np.log(np.exp(t - m).sum(axis=0))


def _two_a(x, y, z):
    """2 atanh(t), t = sinh(x/2) sinh z tanh(z/2) / (cosh y + cosh(x/2) cosh z).

    With sinh z tanh(z/2) = cosh z - 1 this is log(den + num) - log(den - num),
    and both are sums of positive terms:
        den + num = cosh y + e^{x/2}(cosh z - 1/2) + e^{-x/2}/2,
        den - num = cosh y + e^{-x/2} cosh z + sinh(x/2).
    """
    with np.errstate(divide="ignore"):
        log_c = z - LOG2 + np.log1p(np.exp(-2 * z) - np.exp(-z))   # log(cosh z - 1/2)
        plus = _lse(y - LOG2, -y - LOG2, x / 2 + log_c, -x / 2 - LOG2)
        minus = _lse(y - LOG2, -y - LOG2, -x / 2 + logcosh(z), _log_sinh(x / 2))
    return plus - minus


def kernel_F(x, y, z):
    """F(x,y,z) = x - 2a(x,y,z) - 2a(x,z,y) with tanh a as in the Klein-bottle identity."""
    x, y, z = _check_lengths(x, y, z)
    x, y, z = np.broadcast_arrays(x, y, z)
    out = x - _two_a(x, y, z) - _two_a(x, z, y)
    # x - 2a1 - 2a2 cancels when y, z are large; redo those entries at 120 bits
    bad = np.abs(out) < 1e-3 * np.maximum(x, 1.0)
    if np.any(bad):
        out = np.array(out, dtype=float)
        with mpmath.workprec(120):
            for i in np.ndindex(out.shape):
                if bad[i]:
                    out[i] = float(kernel_F_mp(x[i], y[i], z[i]))
    return _out(out)


def lambda_upper(x, y, eps):
    """Lambda with cosh(x/2) + cosh(y/2) = 2 sinh(eps/2) sinh(Lambda/2)."""
    x, y = _check_lengths(x, y)
    e = as_eps(eps)
    logu = log_sum_cosh(x / 2, y / 2) - e.log_two_sinh_half
    u = np.exp(np.minimum(logu, 300.0))
    big = logu + np.log1p(np.sqrt(1.0 + np.exp(-2.0 * logu)))
    return _out(2.0 * np.where(logu < 300.0, np.arcsinh(u), big))


def _ecal_parts(x, y, log_s):
    A = logcosh((x - y) / 4) - log_s
    B = logcosh((x + y) / 4) - log_s
    # 2(A - B) + x without cancellation
    G = x - np.minimum(x, y) + 2.0 * (np.log1p(np.exp(-np.abs(x - y) / 2)) - np.log1p(np.exp(-(x + y) / 2)))
    return A, B, G


def kernel_Ecal(x, y, eps):
    """Closed form of int_eps^Lambda E(x,y,z) dz / tanh(z/2).

    2log^2(cosh((x-y)/4)/s) - 2log^2(cosh((x+y)/4)/s) + x log(cosh((x+y)/4)cosh((x-y)/4)/s^2)
    with s = sinh(eps/2), rewritten as (A+B)(2(A-B)+x).
    """
    x, y = _check_lengths(x, y)
    e = as_eps(eps)
    A, B, G = _ecal_parts(x, y, e.log_sinh_half)
    return _out((A + B) * G)


# x-derivatives at x = 0; the recursion divides by L0 and needs these limits


def kernel_R_dx0(y, z):
    y, z = _check_lengths(y, z)
    # 1 - sinh(z/2) / (cosh(y/2) + cosh(z/2))
    return _out(1.0 - np.exp(_log_sinh(z / 2) - log_sum_cosh(y / 2, z / 2)))


def kernel_D_dx0(y, z):
    y, z = _check_lengths(y, z)
    s = 0.5 * (y + z)
    return _out(2.0 * np.exp(-np.logaddexp(0.0, s)))


def kernel_Ecal_dx0(y, eps):
    (y,) = _check_lengths(y)
    e = as_eps(eps)
    return _out(2.0 * (logcosh(y / 4) - e.log_sinh_half) * (1.0 - np.tanh(y / 4)))


# ---------------------------------------------------------------------------
# extended precision (current mpmath context)


def kernel_R_mp(x, y, z):
    x, y, z = (mpmath.mpf(v) for v in (x, y, z))
    if z > x + y:
        up = mpmath.exp((x + y - z) / 2) + mpmath.exp((x - y - z) / 2) + mpmath.exp(x - z)
        dn = mpmath.exp((y - x - z) / 2) + mpmath.exp(-(x + y + z) / 2) + mpmath.exp(-x - z)
        return mpmath.log1p(up) - mpmath.log1p(dn)
    c = mpmath.cosh(y / 2)
    return x - mpmath.log((c + mpmath.cosh((x + z) / 2)) / (c + mpmath.cosh((x - z) / 2)))


def kernel_D_mp(x, y, z):
    return kernel_R_mp(x, y, z) + kernel_R_mp(x, z, y) - mpmath.mpf(x)


def kernel_E_mp(x, y, z):
    return kernel_R_mp(x, 2 * mpmath.mpf(z), y) - mpmath.mpf(x) / 2


def kernel_F_mp(x, y, z):
    x, y, z = (mpmath.mpf(v) for v in (x, y, z))

    def a(u, v, w):
        t = mpmath.sinh(u / 2) * mpmath.sinh(w) * mpmath.tanh(w / 2) / (
            mpmath.cosh(v) + mpmath.cosh(u / 2) * mpmath.cosh(w)
        )
        if not (-1 < t < 1):
            raise DomainError("atanh argument of kernel F left (-1, 1)")
        return mpmath.atanh(t)

    return x - 2 * a(x, y, z) - 2 * a(x, z, y)


def lambda_upper_mp(x, y, eps):
    x, y, eps = (mpmath.mpf(v) for v in (x, y, eps))
    return 2 * mpmath.asinh((mpmath.cosh(x / 2) + mpmath.cosh(y / 2)) / (2 * mpmath.sinh(eps / 2)))


def kernel_Ecal_mp(x, y, eps):
    x, y, eps = (mpmath.mpf(v) for v in (x, y, eps))
    s = mpmath.sinh(eps / 2)
    A = mpmath.log(mpmath.cosh((x - y) / 4) / s)
    B = mpmath.log(mpmath.cosh((x + y) / 4) / s)
    return 2 * A ** 2 - 2 * B ** 2 + x * (A + B)


def ecal_antiderivative(x, y, z):
    """f(x,y,z) whose z-derivative is E(x,y,z)/tanh(z/2) (double precision)."""
    from .specfun import dilog

    x, y, z = (float(v) for v in (x, y, z))
    lp = logcosh((x + y) / 4)
    lm = logcosh((x - y) / 4)
    sh2 = math.sinh(z / 2) ** 2
    return (
        (x - 4 * lp + 4 * lm) * math.log(math.sinh(z / 2))
        + dilog(-sh2 / math.exp(2 * lp))
        - dilog(-sh2 / math.exp(2 * lm))
    )
