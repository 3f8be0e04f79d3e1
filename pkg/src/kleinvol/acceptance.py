"""The acceptance suite: ten numbered checks, each against an independent
oracle or an exact identity, grouped into suites for ``kleinvol verify``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable

import mpmath
import numpy as np

from . import chi1, identities, kernels, rtr
from .chi1 import T11, T_HALF2, Topology
from .engine import VolumeQuery, total_volume
from .wp import PiPoly, wp_eval, wp_volume


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d}. {self.title}"


def _rel(a: float, b: float) -> float:
    return float(abs(a - b) / max(abs(b), 1e-300))


# ---------------------------------------------------------------------------


def criterion_1() -> Criterion:
    xs, ys, es = (0.5, 2.0, 5.0), (0.3, 1.5, 4.0), (0.2, 0.8)
    grid = [(x, y) for x in xs for y in ys]
    r0 = max(abs(kernels.kernel_R(x, y, 0.0) - x) for x, y in grid)
    dsym = max(abs(kernels.kernel_D(x, y, z) - kernels.kernel_D(x, z, y)) for x, y in grid for z in ys)
    fsym = max(abs(kernels.kernel_F(x, y, z) - kernels.kernel_F(x, z, y)) for x, y in grid for z in ys)
    e0 = max(abs(kernels.kernel_E(0.0, y, z)) for y in ys for z in xs)
    lam = 0.0
    for x, y in grid:
        for e in es:
            L = kernels.lambda_upper(x, y, e)
            lhs = math.cosh(x / 2) + math.cosh(y / 2)
            lam = max(lam, abs(2 * math.sinh(e / 2) * math.sinh(L / 2) - lhs) / lhs)
    ecal = 0.0
    with mpmath.workdps(30):
        for x, y in grid:
            for e in es:
                top = kernels.lambda_upper_mp(x, y, e)
                f = lambda z: kernels.kernel_E_mp(x, y, z) / mpmath.tanh(z / 2)
                q = mpmath.quad(f, mpmath.linspace(e, top, 8))
                ecal = max(ecal, _rel(kernels.kernel_Ecal(x, y, e), float(q)))
    ok = r0 <= 1e-12 and dsym <= 1e-12 and fsym <= 1e-12 and e0 <= 1e-12 and lam <= 1e-12 and ecal <= 1e-8
    return Criterion(1, "kernel layer", ok, {"R(x,y,0)-x": r0, "D symmetry": dsym, "F symmetry": fsym,
                                             "E(0,y,z)": e0, "Lambda inversion": lam, "Ecal vs quadrature": ecal})


def criterion_2() -> Criterion:
    half, one = 0.0, 0.0
    for (L1, L2, e) in ((1.0, 2.0, 0.5), (3.0, 0.4, 0.2), (5.0, 5.0, 1.0)):
        o = chi1.v_minus_half_2_oracle(L1, L2, e)
        v = chi1.v_minus_half_2(L1, L2, e)
        half = max(half, _rel(v, o.fundamental_domain), _rel(v, o.teichmuller_half))
    for (L, e) in ((1.0, 0.5), (3.0, 0.1), (8.0, 1.2)):
        one = max(one, _rel(chi1.v_minus_1_1_reflected(L, e), chi1.v_minus_1_1_oracle(L, e)))
    return Criterion(2, "chi=-1 closed forms vs integral oracles", half <= 1e-8 and one <= 1e-8,
                     {"V-(1/2,2)": half, "V-(1,1)": one})


def criterion_3() -> Criterion:
    refl = max(abs(chi1.v_minus_1_1(L, e) - chi1.v_minus_1_1_reflected(L, e))
               / max(1.0, abs(chi1.v_minus_1_1(L, e)))
               for L in (0.5, 3.0, 10.0) for e in (0.1, 0.5, 1.5))
    exp_ok, worst = True, {}
    for L in (1.2, 3.0, 6.0):
        ex = chi1.v_minus_1_1_expansion(L, 0.5, 40)
        d = abs(ex.value - chi1.v_minus_1_1_reflected(L, 0.5))
        # truncation bound plus a few ulps of round-off in the 40 summed terms
        allow = ex.tail_bound + 64 * 2.0 ** -52 * abs(ex.value)
        worst[f"L={L}"] = (d, ex.tail_bound)
        exp_ok &= d <= allow
    return Criterion(3, "dilog reflection and expansion", refl <= 1e-12 and exp_ok,
                     {"reflection": refl, "expansion (err, bound)": worst})


def criterion_4() -> Criterion:
    res, positive = 0.0, True
    for (s0, s1, L, e) in ((1.0, 1.3, 2.0, 0.5), (0.6, 2.5, 0.5, 0.3), (3.0, 0.9, 6.0, 1.0)):
        r = chi1.kb_mcshane_norbury_residual(chi1.KBState(s0, s1, L, e), 12)
        res = max(res, r.residual)
        positive &= all(t > 0 for t in r.f_terms)
    return Criterion(4, "Klein bottle identity", res <= 1e-8 and positive,
                     {"residual": res, "F terms positive": positive})


def criterion_5() -> Criterion:
    rng = np.random.default_rng(20240605)
    worst = {}
    for top in (Topology(0, 4), T11, Topology(2, 2)):
        poly = wp_volume(top)
        w = 0.0
        for _ in range(2):
            ls = tuple(float(v) for v in rng.uniform(0.2, 3.0, top.n))
            v = total_volume(VolumeQuery(top, ls, 0.5, 0.0, 1e-9)).value
            w = max(w, _rel(v, wp_eval(poly, list(ls))))
        worst[str(top)] = w
    exact = wp_volume(T11) == PiPoly(T11, {(1,): (Fraction(1, 48), 0), (0,): (Fraction(1, 12), 1)})
    return Criterion(5, "b=0 reduction to WP volumes", exact and max(worst.values()) <= 1e-6,
                     {"engine vs WP (rel)": worst, "V(1,1) exact": exact})


def criterion_6() -> Criterion:
    out = {}
    for top, ls in ((Topology(1, 3), (0.5, 1.0, 2.0)), (Topology(2, 2), (1.0, 2.0))):
        vals = [total_volume(VolumeQuery(top, p, 0.5, 1.0, 1e-9)).value for p in sorted(set(permutations(ls)))]
        out[str(top)] = (max(vals) - min(vals)) / max(abs(v) for v in vals)
    return Criterion(6, "b=1 permutation symmetry", max(out.values()) <= 1e-6,
                     {"relative spread": out})


def criterion_7() -> Criterion:
    p = rtr.RefinedParams(1.0, 0.5, 200)
    samples = ((0.31, 0.47), (0.12, 0.83), (-0.2, 0.66), (0.71, -0.38), (1.13, 0.27))
    half = max(_rel(r.value, rtr.omega_half_2_closed(*r.sample, p))
               for r in rtr.rtr_recursion_recompute(0.5, 2, p, samples))
    closed = rtr.omega_1_1_closed(p)
    recs = rtr.rtr_recursion_recompute(1, 1, p, (0.31, 0.12, -0.41, 0.77, 1.23))
    lat = recs[0].lattice.poles
    # coefficients at k/2 grow like e^{k eps}; measure each against the
    # largest closed-form coefficient at the same point
    scale: dict[int, float] = {}
    for (t, _), c in closed.poles.items():
        scale[t] = max(scale.get(t, 0.0), abs(c))
    coef = max(abs(lat.get(k, 0.0) - closed.poles.get(k, 0.0)) / scale[k[0]]
               for k in set(lat) | set(closed.poles))
    point = max(_rel(r.point_part, closed.pieces[0].value(r.sample[0])) for r in recs)
    spectrum = rtr.residue_spectrum(p)
    target = {t: (-p.bb / 2 if t == 0 else (-p.bb if t < 0 else 0.0)) for t in spectrum}
    sp = max(abs(spectrum[t] - target[t]) for t in spectrum)
    ok = half <= 1e-6 and coef <= 1e-6 and point <= 1e-6 and sp <= 1e-10
    return Criterion(7, "refined recursion reproduces the closed forms", ok,
                     {"omega(1/2,2) rel": half, "omega(1,1) pole coefficients": coef,
                      "omega(1,1) point part": point, "omega(1/2,1) residues": sp})


def criterion_8() -> Criterion:
    import sympy

    checks = {
        "(1/2,2) (3,2) b=1": rtr.check_dictionary_chi1(T_HALF2, (3.0, 2.0), 0.5, 1.0).residual,
        "(1,1) L=3 b=1": rtr.check_dictionary_chi1(T11, (3.0,), 0.5, 1.0).residual,
    }
    for b in (0.25, 0.5):
        checks[f"(1/2,2) (3,2) b={b}"] = rtr.check_dictionary_chi1(T_HALF2, (3.0, 2.0), 0.5, b).residual
        checks[f"(1,1) L=3 b={b}"] = rtr.check_dictionary_chi1(T11, (3.0,), 0.5, b).residual
    toy = {}
    for order in ("L1>=L2", "L2>=L1"):
        expr, (L1, L2) = rtr.toy_antidiagonal(order)
        big = L1 if order == "L1>=L2" else L2
        toy[order] = sympy.simplify(expr - L1 * L2 * big / 4) == 0
    ok = max(checks.values()) <= 1e-8 and all(toy.values())
    return Criterion(8, "volume / Laplace dictionary", ok, {"residuals": checks, "toy example exact": toy})


def criterion_9() -> Criterion:
    a2 = all(identities.lemma_a2_check(k) for k in range(1, 51))
    a3 = all(identities.lemma_a3_check(k) for k in range(1, 51))
    a1 = max(identities.lemma_a1_check(k, math.exp(0.25), 400) for k in range(1, 11))
    ch = identities.coefficient_chain(0.5, 20, 400)
    ok = a2 and a3 and a1 <= 1e-8 and ch.ctilde_vs_c <= 1e-10 and ch.c_vs_u <= 1e-10
    return Criterion(9, "lattice coefficient identities", ok,
                     {"a2 exact": a2, "a3 exact": a3, "a1 residual": a1,
                      "raw vs closed C_k": ch.ctilde_vs_c, "2C_k vs U_k": ch.c_vs_u})


def criterion_10() -> Criterion:
    ratios = {e: chi1.v_minus_1_1_reflected(3.0, e) / math.log(e) ** 2 for e in (1e-2, 1e-3, 1e-4)}
    ok = abs(ratios[1e-4] / 2 - 1) <= 0.05
    return Criterion(10, "small-eps limit V-(1,1)/log^2(eps) -> 2", ok,
                     {"ratios": ratios, "relative gap at 1e-4": abs(ratios[1e-4] / 2 - 1)})


CRITERIA: dict[int, Callable[[], Criterion]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}

SUITES: dict[str, tuple[int, ...]] = {
    "kernels": (1,),
    "chi1": (2, 3, 4),
    "engine": (5, 6),
    "rtr": (7, 8),
    "identities": (9,),
    "limits": (10,),
    "fast": (1, 2, 3, 4, 7, 8, 9, 10),
    "all": tuple(range(1, 11)),
}


def run(number: int) -> Criterion:
    t = time.perf_counter()
    c = CRITERIA[number]()
    c.seconds = time.perf_counter() - t
    return c


def run_suite(name: str) -> list[Criterion]:
    return [run(n) for n in SUITES[name]]
