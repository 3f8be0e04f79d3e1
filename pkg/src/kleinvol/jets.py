"""Truncated Laurent series ("jets") and partial-fraction sums.

A :class:`Jet` stores ``sum_{n=lo}^{hi-1} c_n t^n`` for ``t = z - a`` around a
centre ``a``.  Everything past ``hi`` is unknown, and arithmetic tracks how far
the result is still exact, so a residue read from a window that is too short
raises instead of returning garbage.

Centres on the half-integer lattice are encoded by twice their value
(:class:`Centre`), which keeps ``sin(2 pi a) = 0`` exact there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class Centre:
    """Expansion point; ``twice`` is set for lattice points ``a = twice/2``."""

    value: float
    twice: int | None = None

    @classmethod
    def lattice(cls, twice: int) -> "Centre":
        return cls(twice / 2.0, int(twice))

    @classmethod
    def point(cls, z: float) -> "Centre":
        z = float(z)
        if not math.isfinite(z):
            raise DomainError("expansion point must be finite")
        t = 2.0 * z
        if t == round(t):
            return cls.lattice(int(round(t)))
        return cls(z, None)

    def offset(self, p: "Centre") -> float:
        """``self - p``, exact when both are lattice points."""
        if self.twice is not None and p.twice is not None:
            return (self.twice - p.twice) / 2.0
        return self.value - p.value

    def __neg__(self) -> "Centre":
        return Centre(-self.value, None if self.twice is None else -self.twice)


class Jet:
    __slots__ = ("lo", "c")

    def __init__(self, lo: int, coeffs) -> None:
        self.lo = int(lo)
        self.c = np.asarray(coeffs, dtype=float)

    @property
    def hi(self) -> int:
        return self.lo + len(self.c)

    @classmethod
    def zero(cls, hi: int) -> "Jet":
        return cls(hi, np.zeros(0))

    @classmethod
    def const(cls, v: float, hi: int) -> "Jet":
        if hi <= 0:
            return cls.zero(hi)
        c = np.zeros(hi)
        c[0] = v
        return cls(0, c)

    def coeff(self, n: int) -> float:
        if n >= self.hi:
            raise ConvergenceError(f"jet window too small: need t^{n}, have up to t^{self.hi - 1}")
        if n < self.lo:
            return 0.0
        return float(self.c[n - self.lo])

    def residue(self) -> float:
        return self.coeff(-1)

    def principal(self) -> dict[int, float]:
        """Map order m >= 1 to the coefficient of t^-m."""
        if self.hi < 0:
            raise ConvergenceError("jet window does not reach the principal part")
        return {-n: float(self.c[n - self.lo]) for n in range(self.lo, 0)
                if self.c[n - self.lo] != 0.0}

    def truncate(self, hi: int) -> "Jet":
        hi = min(hi, self.hi)
        if hi <= self.lo:
            return Jet.zero(hi)
        return Jet(self.lo, self.c[: hi - self.lo])

    def _align(self, other: "Jet"):
        hi = min(self.hi, other.hi)
        lo = min(self.lo, other.lo, hi)
        a = np.zeros(hi - lo)
        b = np.zeros(hi - lo)
        for dst, j in ((a, self), (b, other)):
            n = min(j.hi, hi) - j.lo
            if n > 0:
                dst[j.lo - lo: j.lo - lo + n] = j.c[:n]
        return lo, a, b

    def __add__(self, other):
        if not isinstance(other, Jet):
            return self + Jet.const(float(other), self.hi)
        lo, a, b = self._align(other)
        return Jet(lo, a + b)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.lo, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.lo, self.c * float(other))
        hi = min(self.lo + other.hi, other.lo + self.hi)
        lo = self.lo + other.lo
        n = hi - lo
        if n <= 0 or len(self.c) == 0 or len(other.c) == 0:
            return Jet.zero(hi)
        prod = np.convolve(self.c, other.c)[:n]
        if len(prod) < n:
            prod = np.concatenate([prod, np.zeros(n - len(prod))])
        return Jet(lo, prod)

    __rmul__ = __mul__

    def shift(self, p: int) -> "Jet":
        """Multiply by t^p."""
        return Jet(self.lo + p, self.c)

    def deriv(self) -> "Jet":
        n = np.arange(self.lo, self.hi, dtype=float)
        return Jet(self.lo - 1, self.c * n)

    def reflect(self) -> "Jet":
        """Jet of f(-z) at -a, given the jet of f at a (t -> -t)."""
        sign = np.where(np.arange(self.lo, self.hi) % 2 == 0, 1.0, -1.0)
        return Jet(self.lo, self.c * sign)

    def strip(self) -> "Jet":
        nz = np.flatnonzero(self.c)
        if len(nz) == 0:
            return Jet.zero(self.hi)
        return Jet(self.lo + nz[0], self.c[nz[0]:])

    def reciprocal(self) -> "Jet":
        s = self.strip()
        if len(s.c) == 0:
            raise DomainError("reciprocal of a jet with no known nonzero coefficient")
        n = len(s.c)
        a = s.c / s.c[0]
        inv = np.zeros(n)
        inv[0] = 1.0
        for k in range(1, n):
            inv[k] = -np.dot(a[1: k + 1], inv[k - 1:: -1][:k])
        return Jet(-s.lo, inv / s.c[0])

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / float(other))
        return self * other.reciprocal()

    def __repr__(self) -> str:
        return f"Jet(lo={self.lo}, c={self.c.tolist()})"


# ---------------------------------------------------------------------------
# elementary jets


def monomial(a: Centre, hi: int, power: int = 1) -> Jet:
    """Jet of z^power at a (power >= 0)."""
    if a.value == 0.0:
        if hi <= power:
            return Jet.zero(hi)
        c = np.zeros(hi - power)
        c[0] = 1.0
        return Jet(power, c)
    c = np.array([math.comb(power, n) * a.value ** (power - n) if n <= power else 0.0
                  for n in range(max(hi, 0))])
    return Jet(0, c)


def pole(a: Centre, p: Centre, m: int, hi: int) -> Jet:
    """Jet of (z - p)^-m at a."""
    d = a.offset(p)
    if d == 0.0:
        if hi <= -m:
            return Jet.zero(hi)
        c = np.zeros(hi + m)
        c[0] = 1.0
        return Jet(-m, c)
    n = np.arange(max(hi, 0))
    c = np.array([(-1) ** k * math.comb(m + k - 1, k) for k in n], dtype=float)
    return Jet(0, c * d ** (-m - n.astype(float)))


def exponential(a: Centre, alpha: float, hi: int, log_scale: float = 0.0) -> Jet:
    """Jet of exp(alpha z + log_scale) at a."""
    if hi <= 0:
        return Jet.zero(hi)
    c = np.empty(hi)
    c[0] = math.exp(alpha * a.value + log_scale)
    for k in range(1, hi):
        c[k] = c[k - 1] * alpha / k
    return Jet(0, c)


def _trig(a: Centre, hi: int):
    """Jets of sin(2 pi z) and cos(2 pi z) at a."""
    w = 2.0 * math.pi
    if a.twice is not None:
        s0, c0 = 0.0, (-1.0 if a.twice % 2 else 1.0)
    else:
        s0, c0 = math.sin(w * a.value), math.cos(w * a.value)
    n = max(hi, 0)
    s = np.zeros(n)
    c = np.zeros(n)
    for k in range(n):
        f = w ** k / math.factorial(k)
        # d^k/dt^k of sin(w(a+t)) at 0 cycles through s0, c0, -s0, -c0
        r = k % 4
        ds = (s0, c0, -s0, -c0)[r]
        dc = (c0, -s0, -c0, s0)[r]
        s[k] = ds * f
        c[k] = dc * f
    return Jet(0, s), Jet(0, c)


def sin2pi(a: Centre, hi: int) -> Jet:
    return _trig(a, hi)[0]


def cot2pi(a: Centre, hi: int) -> Jet:
    """Jet of cot(2 pi z) at a.  The sine is expanded one order further so the
    quotient keeps ``hi``."""
    s, c = _trig(a, hi + 2)
    return (c * s.reciprocal()).truncate(hi)


# ---------------------------------------------------------------------------
# partial-fraction sums


class PoleSum:
    """Finite sum of c (z - p)^-m; keys are (Centre, m).

    Parity splits and linear combinations act on the coefficients directly,
    so cancellations such as ``1/(z+w)^2 - 1/(z+w)^2`` are exact.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[Centre, int], float] | None = None) -> None:
        self.terms: dict[tuple[Centre, int], float] = {}
        for k, v in (terms or {}).items():
            if v != 0.0:
                self.terms[k] = self.terms.get(k, 0.0) + float(v)
        self.terms = {k: v for k, v in self.terms.items() if v != 0.0}

    @classmethod
    def single(cls, p: Centre, m: int, c: float = 1.0) -> "PoleSum":
        return cls({(p, m): c})

    def __add__(self, other: "PoleSum") -> "PoleSum":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return PoleSum(out)

    def __mul__(self, s: float) -> "PoleSum":
        return PoleSum({k: v * s for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __sub__(self, other: "PoleSum") -> "PoleSum":
        return self + other * -1.0

    def reflected(self) -> "PoleSum":
        """The function z -> f(-z)."""
        return PoleSum({(-p, m): v * (-1.0) ** m for (p, m), v in self.terms.items()})

    def parity(self) -> tuple["PoleSum", "PoleSum"]:
        r = self.reflected()
        return (self + r) * 0.5, (self - r) * 0.5

    def __call__(self, z: float) -> float:
        return math.fsum(v * (z - p.value) ** (-m) for (p, m), v in self.terms.items())

    def jet(self, a: Centre, hi: int) -> Jet:
        out = Jet.zero(hi)
        for (p, m), v in self.terms.items():
            out = out + pole(a, p, m, hi) * v
        return out

    def __iter__(self) -> Iterable:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)


class ParityJet:
    """A pair (even part, odd part) of jets at a common centre.

    Parity refers to the function z -> f(z) versus z -> f(-z), not to the
    local variable t.
    """

    __slots__ = ("even", "odd")

    def __init__(self, even: Jet, odd: Jet) -> None:
        self.even = even
        self.odd = odd

    @classmethod
    def of_even(cls, j: Jet) -> "ParityJet":
        return cls(j, Jet.zero(j.hi))

    @classmethod
    def of_odd(cls, j: Jet) -> "ParityJet":
        return cls(Jet.zero(j.hi), j)

    @classmethod
    def of_poles(cls, s: PoleSum, a: Centre, hi: int) -> "ParityJet":
        e, o = s.parity()
        return cls(e.jet(a, hi), o.jet(a, hi))

    def __add__(self, other: "ParityJet") -> "ParityJet":
        return ParityJet(self.even + other.even, self.odd + other.odd)

    def __mul__(self, other):
        if not isinstance(other, ParityJet):
            return ParityJet(self.even * other, self.odd * other)
        return ParityJet(self.even * other.even + self.odd * other.odd,
                         self.even * other.odd + self.odd * other.even)

    __rmul__ = __mul__

    def deriv(self) -> "ParityJet":
        return ParityJet(self.odd.deriv(), self.even.deriv())

    def total(self) -> Jet:
        return self.even + self.odd
