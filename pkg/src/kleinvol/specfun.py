"""Special functions and precision handling.

Everything here works on Python floats and numpy arrays (53-bit tier).  The
extended tier goes through :mod:`mpmath`; :class:`Precision` selects it.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .errors import DomainError

PI2_6 = math.pi ** 2 / 6.0


@dataclass(frozen=True)
class Precision:
    bits: int = 53

    def __post_init__(self) -> None:
        if self.bits < 53:
            raise DomainError(f"precision must be at least 53 bits, got {self.bits}")

    @property
    def extended(self) -> bool:
        return self.bits > 53

    @contextmanager
    def context(self) -> Iterator[None]:
        with mpmath.workprec(self.bits):
            yield


DOUBLE = Precision(53)
EXTENDED = Precision(200)


def check_real(x: float, name: str = "argument") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x}")
    return x


# ---------------------------------------------------------------------------
# dilogarithm


def _li2_series(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 200):
        term = term * x
        inc = term / (k * k)
        out += inc
        if np.all(np.abs(inc) <= 1e-17 * np.maximum(np.abs(out), 1e-300)):
            break
    return out


def _li2_array(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)

    small = np.abs(x) <= 0.5
    out[small] = _li2_series(x[small])

    # x in (1/2, 1): Euler reflection to 1 - x in (0, 1/2)
    upper = (x > 0.5) & (x < 1.0)
    if upper.any():
        u = x[upper]
        out[upper] = PI2_6 - np.log(u) * np.log1p(-u) - _li2_series(1.0 - u)

    # x in [-2, -1/2): Landen to z/(z-1) in (1/3, 2/3]; the part above 1/2
    # is reflected again, so every series call has ratio <= 1/2
    mid = (x < -0.5) & (x >= -2.0)
    if mid.any():
        u = x[mid]
        w = u / (u - 1.0)
        out[mid] = -_li2_array(w) - 0.5 * np.log1p(-u) ** 2

    # x < -2: inversion to 1/x in (-1/2, 0)
    far = x < -2.0
    if far.any():
        u = x[far]
        out[far] = -PI2_6 - 0.5 * np.log(-u) ** 2 - _li2_series(1.0 / u)
    return out


def dilog(x):
    """Real dilogarithm Li2(x) for x < 1 (x = 1 is allowed and gives pi^2/6)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)):
        raise DomainError("dilog argument must be finite")
    if np.any(arr > 1.0):
        raise DomainError("dilog is only defined here for x <= 1")
    flat = arr.reshape(-1)
    res = np.where(flat == 1.0, PI2_6, 0.0)
    mask = flat < 1.0
    if mask.any():
        res[mask] = _li2_array(flat[mask])
    res = res.reshape(arr.shape)
    return float(res) if res.ndim == 0 else res


def dilog_mp(x):
    """Extended-precision Li2 in the current mpmath context."""
    x = mpmath.mpf(x)
    if x > 1:
        raise DomainError("dilog is only defined here for x <= 1")
    return mpmath.polylog(2, x)


# ---------------------------------------------------------------------------
# elementary helpers used by the kernels


def log_two_sinh_half(eps):
    """log(2 sinh(eps/2)), stable for small and large eps."""
    e = np.asarray(eps, dtype=float)
    if np.any(~(e > 0)) or np.any(~np.isfinite(e)):
        raise DomainError("eps must be positive and finite")
    h = 0.5 * e
    # log(2 sinh h) = h + log(1 - exp(-2h)); for small h use log(2h) + log(sinh h / h)
    small = h < 0.5
    out = np.where(
        small,
        np.log(e) + np.log(np.sinh(np.where(small, h, 1.0)) / np.where(small, h, 1.0)),
        h + np.log(-np.expm1(-2.0 * np.where(small, 1.0, h))),
    )
    return float(out) if out.ndim == 0 else out


def log_two_sinh_half_mp(eps):
    eps = mpmath.mpf(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    return mpmath.log(2 * mpmath.sinh(eps / 2))


def logcosh(a):
    """log cosh(a) without overflow."""
    a = np.abs(np.asarray(a, dtype=float))
    out = a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)
    return float(out) if out.ndim == 0 else out


def log_sum_cosh(a, b):
    """log(cosh a + cosh b) without overflow."""
    a = np.abs(np.asarray(a, dtype=float))
    b = np.abs(np.asarray(b, dtype=float))
    m = np.maximum(a, b)
    out = m + np.log(
        np.exp(a - m) + np.exp(-a - m) + np.exp(b - m) + np.exp(-b - m)
    ) - math.log(2.0)
    return float(out) if out.ndim == 0 else out


def harmonic(n: int) -> float:
    return math.fsum(1.0 / j for j in range(1, n + 1))


# ---------------------------------------------------------------------------
# alternating series


def alternating_sum(terms: Sequence[float], levels: int = 12) -> float:
    """Sum an alternating series from its leading ``terms``.

    Plain truncation of sum (-1)^i f(i) with smooth f leaves an error of size
    f(N)/2.  Repeatedly averaging the last partial sums (the Euler transform
    of the tail) removes that error order by order, which is what makes
    1/i^2-type alternating sums usable at a few hundred terms.
    """
    t = np.asarray(terms, dtype=float)
    if t.size == 0:
        return 0.0
    partial = np.cumsum(t)
    levels = max(0, min(levels, t.size - 1))
    row = partial[t.size - 1 - levels:].copy()
    for _ in range(levels):
        row = 0.5 * (row[1:] + row[:-1])
    return float(row[-1])
