"""Combinatorial identities behind the lattice coefficients of omega_{1,1}.

The two polynomial identities are checked in exact rational arithmetic on
Laurent polynomials in X.  The identity with infinite sums is checked
numerically with truncation; its alternating sum is accelerated, its
geometric sums are truncated with an explicit tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Mapping

from .errors import DomainError
from .specfun import alternating_sum


class LaurentPoly:
    """Finitely supported map exponent -> Fraction, read as sum c_n X^n."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Mapping[int, Fraction | int] | None = None) -> None:
        self.c: dict[int, Fraction] = {}
        for n, v in (coeffs or {}).items():
            v = Fraction(v)
            if v:
                self.c[int(n)] = self.c.get(int(n), Fraction(0)) + v
        self.c = {n: v for n, v in self.c.items() if v}

    @classmethod
    def const(cls, v) -> "LaurentPoly":
        return cls({0: v})

    @classmethod
    def monomial(cls, n: int, v=1) -> "LaurentPoly":
        return cls({n: v})

    def __add__(self, other) -> "LaurentPoly":
        other = _lp(other)
        out = dict(self.c)
        for n, v in other.c.items():
            out[n] = out.get(n, Fraction(0)) + v
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({n: -v for n, v in self.c.items()})

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-_lp(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return _lp(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            f = Fraction(other)
            return LaurentPoly({n: v * f for n, v in self.c.items()})
        out: dict[int, Fraction] = {}
        for n, v in self.c.items():
            for m, w in other.c.items():
                out[n + m] = out.get(n + m, Fraction(0)) + v * w
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "LaurentPoly":
        if e < 0:
            raise DomainError("negative powers are not Laurent polynomials in general")
        out, base = LaurentPoly.const(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPoly) and self.c == other.c

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.c.items())))

    def is_zero(self) -> bool:
        return not self.c

    def __call__(self, x: float) -> float:
        return math.fsum(float(v) * x ** n for n, v in self.c.items())

    def __repr__(self) -> str:
        if not self.c:
            return "0"
        return " + ".join(f"({v})*X^{n}" for n, v in sorted(self.c.items()))


def _lp(v) -> LaurentPoly:
    return v if isinstance(v, LaurentPoly) else LaurentPoly.const(v)


X = LaurentPoly.monomial(1)
Y = (X - LaurentPoly.monomial(-1)) ** 2       # (X - 1/X)^2


def _pos(k) -> int:
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    return int(k)


def _sym(j: int) -> LaurentPoly:
    """X^{2j} + X^{-2j}."""
    return LaurentPoly({2 * j: 1, -2 * j: 1})


@lru_cache(maxsize=None)
def _y_power(j: int) -> LaurentPoly:
    return LaurentPoly.const(1) if j == 0 else _y_power(j - 1) * Y


@lru_cache(maxsize=None)
def _binom_series(k: int, power: int) -> LaurentPoly:
    """sum_{j=1}^k j^-power binom(k+j-1, 2j-1) Y^j."""
    out = LaurentPoly()
    for j in range(1, k + 1):
        out = out + _y_power(j) * Fraction(math.comb(k + j - 1, 2 * j - 1), j ** power)
    return out


def lemma_a2_sides(k: int) -> tuple[LaurentPoly, LaurentPoly]:
    """(X^{2k} + X^{-2k})/k - 2/k and sum_j binom(k+j-1, 2j-1) Y^j / j."""
    k = _pos(k)
    return _sym(k) * Fraction(1, k) - Fraction(2, k), _binom_series(k, 1)


def lemma_a2_check(k: int) -> bool:
    lhs, rhs = lemma_a2_sides(k)
    return lhs == rhs


def lemma_a3_sides(k: int) -> tuple[LaurentPoly, LaurentPoly]:
    k = _pos(k)
    h4 = sum((Fraction(4, j) for j in range(1, k)), Fraction(0))
    lhs = _binom_series(k, 2) * k + h4
    rhs = _sym(k) * Fraction(1, k) - Fraction(2, k)
    for j in range(1, k):
        rhs = rhs + _sym(j) * Fraction(2, j)
    return lhs, rhs


def lemma_a3_check(k: int) -> bool:
    lhs, rhs = lemma_a3_sides(k)
    return lhs == rhs


@dataclass(frozen=True)
class Reduction:
    """What is left of the second identity after substituting the first.

    The harmonic constants 4 H_{k-1} on both sides cancel, and the remaining
    statement is a binomial identity between polynomials in Y.
    """

    harmonic_left: Fraction
    harmonic_right: Fraction
    polynomial_residual: LaurentPoly

    @property
    def holds(self) -> bool:
        return self.harmonic_left == self.harmonic_right and self.polynomial_residual.is_zero()


def lemma_a3_reduction(k: int) -> Reduction:
    k = _pos(k)
    h_left = sum((Fraction(4, j) for j in range(1, k)), Fraction(0))
    # each (X^{2j}+X^{-2j})/j on the right equals 2/j plus a Y-polynomial
    h_right = sum((2 * Fraction(2, j) for j in range(1, k)), Fraction(0))
    poly_left = _binom_series(k, 2) * k
    poly_right = _binom_series(k, 1)
    for j in range(1, k):
        poly_right = poly_right + _binom_series(j, 1) * 2
    return Reduction(h_left, h_right, poly_left - poly_right)


# ---------------------------------------------------------------------------
# the identity with infinite sums


@dataclass(frozen=True)
class TruncatedCheck:
    residual: float
    tail_bound: float
    lhs: float
    rhs: float


def lemma_a1_sides(k: int, x: float, K: int, accelerate: bool = True) -> TruncatedCheck:
    """Both sides of the identity truncated at K.

    ``tail_bound`` is the geometric tail of the j-sums, plus either the plain
    alternating-series bound or, when accelerated, the change in the
    accelerated i-sum on dropping its last term (an a-posteriori estimate),
    plus a few ulps of round-off.
    """
    k = _pos(k)
    x = float(x)
    if not x > 1:
        raise DomainError("X must exceed 1")
    if K <= k + 1:
        raise DomainError("K must exceed k + 1")
    s = (-1) ** k
    alt = [(-1) ** i / ((i - k) * (i + k)) for i in range(1, K + 1) if i != k]
    isum = alternating_sum(alt) if accelerate else math.fsum(alt)
    lx = math.log(x)
    geo = math.fsum(math.exp(-2 * (j + k) * lx) / (k * (j + k)) + math.exp(-2 * (j - k) * lx) / (k * (j - k))
                    for j in range(1, K + 1) if j != k)
    lhs = 2 * isum + s * geo
    inner = ((x ** (-4 * k) - 1) / (2 * k) + 2 * math.log1p(-x ** -2) + 1 / (k * x ** (2 * k))
             + math.fsum((x ** (2 * j) + x ** (-2 * j)) / j for j in range(1, k)))
    rhs = 1 / k ** 2 - s / k * inner
    r = math.exp(-2 * lx)
    tail = 2 * r ** (K + 1 - k) / (k * (K + 1 - k) * (1 - r))
    if accelerate:
        tail += abs(isum - alternating_sum(alt[:-1]))
    else:
        tail += 2 / (K * K - k * k)
    tail += 16 * 2.0 ** -52 * max(1.0, abs(lhs))
    return TruncatedCheck(abs(lhs - rhs), tail, lhs, rhs)


def lemma_a1_check(k: int, x: float, K: int) -> float:
    """Residual of the truncated identity; compare with ``lemma_a1_sides(...).tail_bound``."""
    return lemma_a1_sides(k, x, K).residual


@dataclass(frozen=True)
class ChainReport:
    ctilde_vs_c: float
    c_vs_u: float
    lemma_a1: float


def coefficient_chain(eps: float, kmax: int = 20, K: int = 400) -> ChainReport:
    """Largest residuals along A.1 -> (raw = closed lattice coefficient) -> U relation."""
    from .rtr import c_coeff, ctilde_coeff, u_relation_residual

    x = math.exp(eps / 2)
    a1 = max(lemma_a1_check(k, x, K) for k in range(1, kmax + 1))
    ct = max(abs(ctilde_coeff(k, eps, K).value - c_coeff(k, eps)) / max(1.0, abs(c_coeff(k, eps)))
             for k in range(1, kmax + 1))
    cu = max(u_relation_residual(k, eps) for k in range(1, kmax + 1))
    return ChainReport(ct, cu, a1)
