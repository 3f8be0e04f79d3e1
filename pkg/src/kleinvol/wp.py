"""Exact Weil-Petersson volume polynomials (the b = 0 recursion).

Inner volumes are exact :class:`PiPoly` objects, so one step of the
recursion only needs kernel moments

    MR_k(x, y) = int_0^inf p^{2k+1} R(x, y, p) dp,
    MD_{a,b}(x) = int int p^{2a+1} q^{2b+1} D(x, p, q) dp dq
                = B(2a+2, 2b+2) int_0^inf s^{2a+2b+3} R(x, 0, s) ds,

(the last line because D depends on p + q only and D(x, s, 0) = R(x, 0, s)).
The moments are computed by mpmath quadrature at >= 200 bits, the recursion
is evaluated at a set of length tuples, the symmetric-monomial coefficients
are solved for, and each coefficient c is recognised as q * pi^{2j} with q
rational.  The result is checked at fresh tuples before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Mapping, Sequence

import mpmath

from .chi1 import Topology
from .errors import DomainError, ReconstructionError
from .kernels import kernel_R_mp
from .specfun import EXTENDED, Precision

MAX_DIM = 6
DENOM_BOUND = 10 ** 12


# ---------------------------------------------------------------------------
# PiPoly


@dataclass(frozen=True)
class PiPoly:
    """Polynomial in L_1^2..L_n^2 with coefficients q * pi^{2j}.

    ``terms`` maps an exponent tuple alpha (powers of L_i^2) to (q, j).
    """

    top: Topology
    terms: Mapping[tuple, tuple]

    def __post_init__(self) -> None:
        d = self.top.dim
        clean = {}
        for a, (q, j) in self.terms.items():
            a = tuple(int(x) for x in a)
            if len(a) != self.top.n:
                raise DomainError(f"exponent {a} has wrong arity for {self.top}")
            q = Fraction(q)
            if q == 0:
                continue
            if sum(a) + j != d:
                raise DomainError(f"term {a} with pi^{2 * j} breaks homogeneity {d}")
            clean[a] = (q, int(j))
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def symmetric(self) -> bool:
        for a, c in self.terms.items():
            for b in set(permutations(a)):
                if self.terms.get(b) != c:
                    return False
        return True

    def __call__(self, lengths) -> mpmath.mpf:
        return wp_eval(self, lengths)

    def coefficient_in(self, slot: int, lengths_other: Sequence) -> dict:
        """Coefficients of p^{2k} after fixing every slot but ``slot``."""
        out: dict[int, mpmath.mpf] = {}
        sq = [mpmath.mpf(x) ** 2 for x in lengths_other]
        pi2 = mpmath.pi ** 2
        for a, (q, j) in self.terms.items():
            rest = a[:slot] + a[slot + 1:]
            v = mpmath.mpf(q.numerator) / q.denominator * pi2 ** j
            for s, e in zip(sq, rest):
                v *= s ** e
            out[a[slot]] = out.get(a[slot], 0) + v
        return out

    def coefficient_in_two(self, slots: tuple, lengths_other: Sequence) -> dict:
        """Coefficients of p^{2a} q^{2b} for the two given slots."""
        i, k = slots
        out: dict[tuple, mpmath.mpf] = {}
        sq = [mpmath.mpf(x) ** 2 for x in lengths_other]
        pi2 = mpmath.pi ** 2
        for a, (q, j) in self.terms.items():
            rest = tuple(e for m, e in enumerate(a) if m not in (i, k))
            v = mpmath.mpf(q.numerator) / q.denominator * pi2 ** j
            for s, e in zip(sq, rest):
                v *= s ** e
            key = (a[i], a[k])
            out[key] = out.get(key, 0) + v
        return out

    def render(self) -> str:
        return render_pipoly(self)

    def __str__(self) -> str:
        return self.render()


def wp_eval(p: PiPoly, lengths, precision: Precision = EXTENDED):
    """Evaluate at the given lengths; float result at 53 bits, mpf otherwise."""
    if not isinstance(lengths, (list, tuple)):
        lengths = [lengths]
    if len(lengths) != p.top.n:
        raise DomainError(f"{p.top} needs {p.top.n} lengths, got {len(lengths)}")
    with mpmath.workprec(max(precision.bits, 53)):
        sq = [mpmath.mpf(x) ** 2 for x in lengths]
        pi2 = mpmath.pi ** 2
        tot = mpmath.mpf(0)
        for a, (q, j) in p.terms.items():
            v = mpmath.mpf(q.numerator) / q.denominator * pi2 ** j
            for s, e in zip(sq, a):
                v *= s ** e
            tot += v
        return float(tot) if not precision.extended else +tot


# ---------------------------------------------------------------------------
# rendering


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _mono(a: tuple) -> str:
    return "·".join(f"L{i + 1}^{2 * e}" for i, e in enumerate(a) if e)


def _factor(a: tuple, j: int) -> str:
    parts = []
    if j:
        parts.append(f"pi^{2 * j}")
    m = _mono(a)
    if m:
        parts.append(m)
    return "·".join(parts)


def _single(q: Fraction, a: tuple, j: int) -> str:
    f = _factor(a, j)
    if not f:
        return _frac(q)
    if q == 1:
        return f
    if q.numerator == 1:
        return f"{f}/{q.denominator}"
    return f"{_frac(q)}·{f}"


def render_pipoly(p: PiPoly) -> str:
    """Render terms with coefficient q * pi^{2j}.

    Terms whose permutation orbit is a single monomial come first, then the
    permutation orbits written as ``q·pi^{2j}·(sum of monomials)``; both
    groups in descending degree.
    """
    seen = set()
    singles, groups = [], []
    for a in sorted(p.terms, key=lambda a: (-sum(a), tuple(-x for x in a))):
        if a in seen:
            continue
        orbit = sorted(set(permutations(a)), key=lambda b: tuple(-x for x in b))
        seen.update(orbit)
        q, j = p.terms[a]
        if len(orbit) == 1 or any(p.terms.get(b) != (q, j) for b in orbit):
            for b in orbit:
                if b in p.terms:
                    qb, jb = p.terms[b]
                    singles.append(_single(qb, b, jb))
            continue
        inner = "+".join(_mono(b) for b in orbit)
        head = [] if q == 1 else [_frac(q)]
        if j:
            head.append(f"pi^{2 * j}")
        groups.append("·".join(head + [f"({inner})"]))
    out = singles + groups
    return " + ".join(out) if out else "0"


# ---------------------------------------------------------------------------
# kernel moments


def _cutoff(x, extra_power: int) -> mpmath.mpf:
    """Upper limit beyond which s^power e^{-(s - x)/2} is below 2^-prec."""
    bits = mpmath.mp.prec
    c = mpmath.mpf(x) + 20
    for _ in range(30):
        c = mpmath.mpf(x) + 2 * (bits * mpmath.log(2) + 10 + (extra_power + 1) * mpmath.log(c + 1))
    return c


def _quad_panels(f, hi, width=8):
    n = max(1, int(mpmath.ceil(hi / width)))
    pts = [hi * k / n for k in range(n + 1)]
    return mpmath.quad(f, pts)


@lru_cache(maxsize=4096)
def _moment_R(power: int, x: str, y: str, prec: int):
    with mpmath.workprec(prec):
        X, Y = mpmath.mpf(x), mpmath.mpf(y)
        hi = _cutoff(X + Y, power)
        return _quad_panels(lambda p: p ** power * kernel_R_mp(X, Y, p), hi)


def moment_R(k: int, x, y, measure: str = "p dp") -> mpmath.mpf:
    """int_0^inf p^{2k+1} R(x, y, p) dp  (p^{2k} for the plain-dp variant)."""
    power = 2 * k + (1 if measure == "p dp" else 0)
    return _moment_R(power, mpmath.nstr(mpmath.mpf(x), 60), mpmath.nstr(mpmath.mpf(y), 60), mpmath.mp.prec)


def moment_D(a: int, b: int, x, measure: str = "p dp") -> mpmath.mpf:
    """int int p^{2a+1} q^{2b+1} D(x, p, q) dp dq via the Beta reduction."""
    if measure == "p dp":
        beta = mpmath.beta(2 * a + 2, 2 * b + 2)
        power = 2 * a + 2 * b + 3
    else:
        beta = mpmath.beta(2 * a + 1, 2 * b + 1)
        power = 2 * a + 2 * b + 1
    return beta * _moment_R(power, mpmath.nstr(mpmath.mpf(x), 60), "0", mpmath.mp.prec)


# ---------------------------------------------------------------------------
# one recursion step with exact inner volumes


def _splits(g: int, n_rest: int):
    idx = range(n_rest)
    for g1 in range(g + 1):
        for r in range(n_rest + 1):
            for I in combinations(idx, r):
                J = tuple(j for j in idx if j not in I)
                t1 = Topology(2 * g1, len(I) + 1)
                t2 = Topology(2 * (g - g1), len(J) + 1)
                if t1.stable and t2.stable:
                    yield t1, I, t2, J


def recursion_value(top: Topology, lengths: Sequence, inner, measure: str = "p dp") -> mpmath.mpf:
    """b = 0 volume at ``lengths`` (distinguished first) from exact inner volumes.

    ``inner(top)`` returns the PiPoly of a smaller topology.
    """
    g, n = top.twice_g // 2, top.n
    L0 = mpmath.mpf(lengths[0])
    rest = [mpmath.mpf(v) for v in lengths[1:]]
    total = mpmath.mpf(0)
    if n >= 2:
        tR = Topology(2 * g, n - 1)
        if tR.stable:
            poly = inner(tR)
            for i, Li in enumerate(rest):
                others = rest[:i] + rest[i + 1:]
                for k, c in poly.coefficient_in(0, others).items():
                    total += c * moment_R(k, L0, Li, measure)
    dterm = mpmath.mpf(0)
    if g >= 1:
        tD = Topology(2 * (g - 1), n + 1)
        if tD.stable:
            for (a, b), c in inner(tD).coefficient_in_two((0, 1), rest).items():
                dterm += c * moment_D(a, b, L0, measure)
    for t1, I, t2, J in _splits(g, len(rest)):
        c1 = inner(t1).coefficient_in(0, [rest[i] for i in I])
        c2 = inner(t2).coefficient_in(0, [rest[j] for j in J])
        for a, x in c1.items():
            for b, y in c2.items():
                dterm += x * y * moment_D(a, b, L0, measure)
    total += dterm / 2
    return total / L0


def torus_value(L, measure: str = "p dp") -> mpmath.mpf:
    """(1,1) volume from gluing two cuffs of a pair of pants.

    With the p dp measure this is (1/(2L)) int p D(L, p, p) dp
    = (1/(8L)) int s R(L, 0, s) ds.
    """
    L = mpmath.mpf(L)
    if measure == "p dp":
        return moment_R(0, L, 0, measure) / (8 * L)
    # plain dp: (1/(2L)) int D(L,p,p) dp = (1/(4L)) int R(L,0,s) ds
    return moment_R(0, L, 0, "dp") / (4 * L)


# ---------------------------------------------------------------------------
# reconstruction


def _orbits(n: int, d: int):
    """Partitions of 0..d with at most n parts, padded to length n (descending)."""
    out = []

    def rec(prefix, left, maxpart):
        if len(prefix) == n:
            if left == 0:
                out.append(tuple(prefix))
            return
        for v in range(min(left, maxpart), -1, -1):
            rec(prefix + [v], left - v, v)

    for deg in range(d + 1):
        rec([], deg, deg)
    return out


def _orbit_value(o: tuple, sq) -> mpmath.mpf:
    tot = mpmath.mpf(0)
    for b in set(permutations(o)):
        v = mpmath.mpf(1)
        for s, e in zip(sq, b):
            v *= s ** e
        tot += v
    return tot


def _nodes(n: int, count: int, offset: int = 0):
    # deterministic, distinct, non-symmetric tuples of simple rationals
    base = [Fraction(3, 4), Fraction(5, 4), Fraction(2, 1), Fraction(1, 2), Fraction(7, 4), Fraction(5, 2),
            Fraction(3, 2), Fraction(1, 1), Fraction(9, 4), Fraction(11, 4)]
    out = []
    k = offset
    while len(out) < count:
        out.append(tuple(base[(k * (i + 2) + i * i + k // len(base)) % len(base)] for i in range(n)))
        k += 1
    return out


def recognise(c: mpmath.mpf, j: int, tol_digits: int = 40) -> Fraction:
    """Find q with c = q * pi^{2j}, denominator at most DENOM_BOUND."""
    x = c / mpmath.pi ** (2 * j)
    q = Fraction(mpmath.nstr(x, 50, strip_zeros=False)).limit_denominator(DENOM_BOUND)
    err = abs(x - mpmath.mpf(q.numerator) / q.denominator)
    if err > mpmath.mpf(10) ** (-tol_digits) * max(1, abs(x)):
        raise ReconstructionError(f"coefficient {mpmath.nstr(x, 20)}·pi^{2 * j} is not a small rational "
                                  f"(residual {mpmath.nstr(err, 3)})")
    return q


_CACHE: dict = {}


def wp_volume(top: Topology, precision: Precision = EXTENDED, measure: str = "p dp") -> PiPoly:
    """Exact WP volume polynomial by reconstruction from the b = 0 recursion."""
    if not top.integer_genus:
        raise DomainError("WP volumes need integer genus")
    top.require_stable()
    if top.dim > MAX_DIM:
        raise DomainError(f"3g-3+n = {top.dim} exceeds the desk-scale limit {MAX_DIM}")
    if precision.bits < 200:
        raise DomainError("reconstruction needs at least 200 bits")
    if measure not in ("p dp", "dp"):
        raise DomainError(f"unknown measure {measure!r}")
    key = (top, precision.bits, measure)
    if key in _CACHE:
        return _CACHE[key]
    if top == Topology(0, 3):
        poly = PiPoly(top, {(0, 0, 0): (Fraction(1), 0)})
    else:
        with mpmath.workprec(precision.bits):
            poly = _reconstruct(top, precision, measure)
    _CACHE[key] = poly
    return poly


def _value(top, lengths, precision, measure):
    if top == Topology(2, 1):
        return torus_value(lengths[0], measure)
    return recursion_value(top, lengths, lambda t: wp_volume(t, precision, measure), measure)


def _reconstruct(top: Topology, precision: Precision, measure: str) -> PiPoly:
    n, d = top.n, top.dim
    orbits = _orbits(n, d)
    nodes = _nodes(n, len(orbits))
    A = mpmath.matrix(len(nodes), len(orbits))
    rhs = mpmath.matrix(len(nodes), 1)
    for r, nd in enumerate(nodes):
        sq = [mpmath.mpf(x.numerator) / x.denominator for x in nd]
        sq = [s * s for s in sq]
        for c, o in enumerate(orbits):
            A[r, c] = _orbit_value(o, sq)
        rhs[r] = _value(top, [mpmath.mpf(x.numerator) / x.denominator for x in nd], precision, measure)
    try:
        sol = mpmath.lu_solve(A, rhs)
    except ZeroDivisionError as exc:
        raise ReconstructionError("singular node system") from exc
    terms = {}
    for c, o in enumerate(orbits):
        j = d - sum(o)
        q = recognise(sol[c], j)
        for b in set(permutations(o)):
            terms[b] = (q, j)
    poly = PiPoly(top, terms)
    # fresh-point verification
    for nd in _nodes(n, 2, offset=len(orbits) + 3):
        ls = [mpmath.mpf(x.numerator) / x.denominator for x in nd]
        direct = _value(top, ls, precision, measure)
        if abs(direct - wp_eval(poly, ls, precision)) > mpmath.mpf(10) ** -30 * max(1, abs(direct)):
            raise ReconstructionError(f"reconstructed {top} polynomial fails at fresh point {nd}")
    return poly
