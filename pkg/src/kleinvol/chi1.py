"""Euler characteristic -1 volumes: closed forms, integral oracles and the
Klein-bottle trace machinery.

Half-integer genus is carried exactly as ``twice_g``.  All closed forms are
written through log-cosh so they stay finite for large boundary lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import mpmath
import numpy as np

from .errors import ConvergenceError, DomainError, UnstableTopologyError
from .kernels import RegEps, as_eps, kernel_D, kernel_F, lambda_upper
from .specfun import dilog, harmonic, logcosh

PI2 = math.pi ** 2


@dataclass(frozen=True, order=True)
class Topology:
    twice_g: int
    n: int

    def __post_init__(self) -> None:
        if int(self.twice_g) != self.twice_g or self.twice_g < 0:
            raise DomainError(f"twice_g must be a non-negative integer, got {self.twice_g}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "twice_g", int(self.twice_g))
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def of(cls, g, n: int) -> "Topology":
        tg = Fraction(g) * 2
        if tg.denominator != 1:
            raise DomainError(f"genus must be a multiple of 1/2, got {g}")
        return cls(int(tg), n)

    @property
    def g(self) -> Fraction:
        return Fraction(self.twice_g, 2)

    @property
    def chi(self) -> int:
        return 2 - self.twice_g - self.n

    @property
    def stable(self) -> bool:
        return self.chi < 0

    @property
    def integer_genus(self) -> bool:
        return self.twice_g % 2 == 0

    @property
    def dim(self) -> int:
        """Complex dimension 3g-3+n of the orientable moduli space."""
        if not self.integer_genus:
            raise DomainError("dimension is defined for integer genus only")
        return 3 * (self.twice_g // 2) - 3 + self.n

    def require_stable(self) -> None:
        if not self.stable:
            raise UnstableTopologyError(f"{self} is unstable (chi = {self.chi})")

    def __str__(self) -> str:
        g = self.g
        gs = str(g.numerator) if g.denominator == 1 else f"{g.numerator}/{g.denominator}"
        return f"({gs},{self.n})"


T03 = Topology(0, 3)
T11 = Topology(2, 1)
T_HALF2 = Topology(1, 2)


def _lengths(lengths, n: int) -> list[float]:
    if np.ndim(lengths) == 0:
        lengths = [lengths]
    out = [float(v) for v in lengths]
    if len(out) != n:
        raise DomainError(f"expected {n} boundary lengths, got {len(out)}")
    for v in out:
        if not (math.isfinite(v) and v >= 0):
            raise DomainError("boundary lengths must be finite and non-negative")
    return out


# ---------------------------------------------------------------------------
# orientable seeds


def v_plus_chi1(top: Topology, lengths) -> float:
    if top == T03:
        _lengths(lengths, 3)
        return 1.0
    if top == T11:
        (L,) = _lengths(lengths, 1)
        return L * L / 48.0 + PI2 / 12.0
    raise DomainError(f"no orientable chi=-1 volume for {top}")


# ---------------------------------------------------------------------------
# V^-_{1/2,2}


def v_minus_half_2(L1: float, L2: float, eps) -> float:
    """log[cosh((L1+L2)/4) cosh((L1-L2)/4) / sinh^2(eps/2)]."""
    L1, L2 = _lengths([L1, L2], 2)
    e = as_eps(eps)
    return logcosh((L1 + L2) / 4) + logcosh((L1 - L2) / 4) - 2.0 * e.log_sinh_half


class HalfTwoOracle(NamedTuple):
    fundamental_domain: float
    teichmuller_half: float
    lstar: float


def _quad(f, pts, what: str):
    val, err = mpmath.quad(f, pts, error=True)
    if not mpmath.isfinite(val) or abs(err) > 1e-12 * max(1.0, abs(val)):
        raise ConvergenceError(f"{what}: quadrature error estimate {float(err):.3g}")
    return float(val)


def v_minus_half_2_oracle(L1: float, L2: float, eps) -> HalfTwoOracle:
    """Both direct integral forms of V^-_{1/2,2}.

    (a) integral of d l / tanh(l/2) from eps to l*, where 2 sinh^2(l*/2) = cosh(L1/2)+cosh(L2/2);
    (b) half the same integrand from eps to Lambda(L1, L2, eps).
    """
    L1, L2 = _lengths([L1, L2], 2)
    e = as_eps(eps)
    lstar = 2.0 * math.asinh(math.sqrt((math.cosh(L1 / 2) + math.cosh(L2 / 2)) / 2))
    if lstar < e.eps:
        raise DomainError("eps exceeds the one-sided length l*")
    lam = lambda_upper(L1, L2, e)
    f = lambda t: 1 / mpmath.tanh(t / 2)
    with mpmath.workdps(30):
        a = _quad(f, [e.eps, lstar], "fundamental domain integral")
        b = 0.5 * _quad(f, [e.eps, lam], "Teichmuller integral")
    return HalfTwoOracle(a, b, lstar)


# ---------------------------------------------------------------------------
# V^-_{1,1}


def _log_X(L: float, e: RegEps) -> float:
    # X = cosh^2(L/4) / sinh^2(eps/2)
    return 2.0 * (logcosh(L / 4) - e.log_sinh_half)


def v_minus_1_1(L: float, eps) -> float:
    """-Li2(-cosh^2(L/4)/sinh^2(eps/2))."""
    (L,) = _lengths([L], 1)
    e = as_eps(eps)
    lx = _log_X(L, e)
    if lx > 700:
        raise DomainError("argument too large for the direct form; use v_minus_1_1_reflected")
    return -dilog(-math.exp(lx))


def v_minus_1_1_reflected(L: float, eps) -> float:
    """2log^2(sinh(eps/2)/cosh(L/4)) + pi^2/6 + Li2(-sinh^2(eps/2)/cosh^2(L/4))."""
    (L,) = _lengths([L], 1)
    e = as_eps(eps)
    lx = _log_X(L, e)
    return 0.5 * lx * lx + PI2 / 6 + dilog(-math.exp(-lx))


def v_minus_1_1_oracle(L: float, eps) -> float:
    """2 int_{sinh(eps/2)}^inf ds0/s0 log[(s0^2 + cosh^2(L/4)) / s0^2], by quadrature.

    The inner s1 integral over the unfolded domain is done in closed form;
    with s0 = e^t the outer integrand is log1p(c^2 e^{-2t}).
    """
    (L,) = _lengths([L], 1)
    e = as_eps(eps)
    with mpmath.workdps(30):
        c2 = mpmath.cosh(mpmath.mpf(L) / 4) ** 2
        t0 = mpmath.log(mpmath.sinh(mpmath.mpf(e.eps) / 2))
        tc = mpmath.log(c2) / 2
        pts = [t0, tc, tc + 10, tc + 40] if t0 < tc else [t0, t0 + 10, t0 + 40]
        f = lambda t: mpmath.log1p(c2 * mpmath.exp(-2 * t))
        body = _quad(f, pts, "unfolded Klein-bottle integral")
        # tail beyond the last point: log1p(u) <= u, integral of c^2 e^{-2t}
        tail = float(c2 * mpmath.exp(-2 * pts[-1]) / 2)
    return 2.0 * (body + tail)


def v_minus_1_1_oracle_integrand(s0: float, L: float) -> float:
    c2 = math.cosh(L / 4) ** 2
    return 2.0 * math.log1p(c2 / (s0 * s0)) / s0


# ---------------------------------------------------------------------------
# Klein-bottle trace identities


@dataclass(frozen=True)
class KBState:
    s0: float
    s1: float
    L: float
    eps: RegEps

    def __post_init__(self) -> None:
        e = as_eps(self.eps)
        object.__setattr__(self, "eps", e)
        if not (self.L >= 0 and math.isfinite(self.L)):
            raise DomainError("boundary length must be finite and non-negative")
        lo = e.sinh_half
        if self.s0 < lo or self.s1 < lo:
            raise DomainError(f"s0, s1 must be at least sinh(eps/2) = {lo}")


def kb_two_sided_length(st: KBState) -> float:
    """The two-sided length l with cosh(l/2) = (s0^2+s1^2+cosh^2(L/4)) / (2 s0 s1)."""
    c2 = math.cosh(st.L / 4) ** 2
    arg = (st.s0 ** 2 + st.s1 ** 2 + c2) / (2 * st.s0 * st.s1)
    return 2.0 * math.acosh(arg)


KB_WINDOW_CAP = 200


def kb_sequence(st: KBState, lo: int, hi: int) -> dict[int, float]:
    """s_i for lo <= i <= hi, from s_{i-1} s_{i+1} = s_i^2 + cosh^2(L/4)."""
    if lo > 0 or hi < 1:
        raise DomainError("window must contain indices 0 and 1")
    if hi - lo > 2 * KB_WINDOW_CAP:
        raise DomainError(f"window wider than {2 * KB_WINDOW_CAP}")
    c2 = math.cosh(st.L / 4) ** 2
    s = {0: float(st.s0), 1: float(st.s1)}
    for i in range(1, hi):
        s[i + 1] = (s[i] ** 2 + c2) / s[i - 1]
    for i in range(0, lo, -1):
        s[i - 1] = (s[i] ** 2 + c2) / s[i + 1]
    if not all(math.isfinite(v) for v in s.values()):
        raise DomainError("trace sequence overflowed; shrink the window")
    return dict(sorted(s.items()))


class MNResidual(NamedTuple):
    residual: float
    f_terms: tuple[float, ...]
    two_sided: float


def kb_mcshane_norbury_residual(st: KBState, K: int) -> MNResidual:
    """|L - D(L,l,l) - sum_{|i|<=K} F(L, l_i, l_{i+1})| with l_i = 2 asinh(s_i)."""
    if K < 0:
        raise DomainError("K must be non-negative")
    seq = kb_sequence(st, -K, K + 1)
    ell = {i: 2.0 * math.asinh(v) for i, v in seq.items()}
    two = kb_two_sided_length(st)
    terms = tuple(float(kernel_F(st.L, ell[i], ell[i + 1])) for i in range(-K, K + 1))
    lhs = st.L - float(kernel_D(st.L, two, two))
    return MNResidual(abs(lhs - math.fsum(terms)), terms, two)


# ---------------------------------------------------------------------------
# expansion in e^{-L/2}


def u_coeff(k: int, eps) -> float:
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    k = int(k)
    e = as_eps(eps)
    l2s = e.log_two_sinh_half
    w = (2.0 * e.sinh_half) ** 2
    tail = math.fsum(w ** j / (j * j) * math.comb(k + j - 1, 2 * j - 1) for j in range(1, k + 1))
    return 4.0 / k * l2s + 4.0 / k * harmonic(k - 1) + tail


class Expansion(NamedTuple):
    value: float
    tail_bound: float


def v_minus_1_1_expansion(L: float, eps, K: int) -> Expansion:
    (L,) = _lengths([L], 1)
    e = as_eps(eps)
    if not L > 2 * e.eps:
        raise DomainError(f"expansion needs L > 2 eps (L={L}, eps={e.eps})")
    if K < 1:
        raise DomainError("K must be at least 1")
    l2s = e.log_two_sinh_half
    head = L * L / 8 - L * l2s + PI2 / 6 + 2 * l2s * l2s
    terms = [
        (-1) ** k * math.exp(-k * L / 2) * (u_coeff(k, e) - L / k) for k in range(1, K + 1)
    ]
    # |term_k| <= [(L + 4|log 2s| + 4(1 + log k)) + e^{k eps}] e^{-kL/2} / k, ratio <= r
    r = math.exp(-(L / 2 - e.eps))
    k1 = K + 1
    envelope = ((L + 4 * abs(l2s) + 4 * (1 + math.log(k1))) * math.exp(-k1 * L / 2)
                + math.exp(-k1 * (L / 2 - e.eps))) / k1
    return Expansion(head + math.fsum(terms), 2.0 * envelope / (1.0 - r))


# ---------------------------------------------------------------------------
# b-weighted chi = -1 volumes


def total_chi1(top: Topology, lengths, eps, b: float) -> float:
    if top.chi != -1:
        raise DomainError(f"{top} does not have Euler characteristic -1")
    b = float(b)
    if not (math.isfinite(b) and b >= 0):
        raise DomainError("b must be finite and non-negative")
    e = as_eps(eps)
    if top == T03:
        _lengths(lengths, 3)
        return 1.0
    if top == T_HALF2:
        L1, L2 = _lengths(lengths, 2)
        return b * v_minus_half_2(L1, L2, e)
    (L,) = _lengths(lengths, 1)
    vp = v_plus_chi1(T11, [L])
    vm = v_minus_1_1_reflected(L, e)
    return (1 + b) * vp - b * b * (vp - vm)


def v_minus_chi1(top: Topology, lengths, eps) -> float:
    """The non-orientable chi=-1 volumes (zero for the pair of pants)."""
    if top == T03:
        _lengths(lengths, 3)
        return 0.0
    if top == T_HALF2:
        return v_minus_half_2(*_lengths(lengths, 2), eps)
    if top == T11:
        return v_minus_1_1_reflected(_lengths(lengths, 1)[0], eps)
    raise DomainError(f"{top} does not have Euler characteristic -1")


def v_half_1_aux(L: float) -> float:
    """1/(2 L tanh(L/4)); the unregularised (1/2,1) volume suggested by the dictionary."""
    L = float(L)
    if not (L > 0 and math.isfinite(L)):
        raise DomainError("v_half_1_aux needs L > 0")
    return 1.0 / (2.0 * L * math.tanh(L / 4))


def lengths_from_sequence(seq: Sequence[float]) -> list[float]:
    return [2.0 * math.asinh(s) for s in seq]
