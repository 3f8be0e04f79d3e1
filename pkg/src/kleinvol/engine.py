"""Numerical b-deformed volume recursion in double precision.

For a stable topology with chi < -1 the volume with distinguished boundary
L0 is

    L0 V(L0, L) = sum_i int p R(L0, L_i, p) V(p, L without L_i) dp
                + 1/2 int int p q D(L0, p, q) [(1+b) V_{g-1}(p, q, L) + sum over splits V V] dp dq
                + b int p Ecal(L0, p; eps) V_{g-1/2}(p, L) dp

and chi = -1 volumes are the closed forms of :mod:`kleinvol.chi1`.  The
non-orientable part V^- is available through its own signed recursion
(sector ``"minus"``), which uses the orientable volumes for the plus slots.

Every inner volume is a function of the glued length with the remaining
lengths frozen; the glued length always takes the distinguished first slot.
Inner families are closed forms at chi = -1 and piecewise Chebyshev
surrogates below that.  The D kernel depends on p and q only through p + q,
so its double integral is done in the coordinates (s = p + q, p); a plain
(p, q) tensor rule is kept for cross-checking.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np

from .chi1 import PI2, T03, T11, T_HALF2, Topology, total_chi1, v_minus_chi1
from .errors import ConvergenceError, DomainError
from .kernels import (
    RegEps,
    as_eps,
    kernel_D,
    kernel_D_dx0,
    kernel_Ecal,
    kernel_Ecal_dx0,
    kernel_R,
    kernel_R_dx0,
)
from .quadrature import composite, lower_order, simplex_rule
from .specfun import DOUBLE, Precision, dilog, logcosh
from .surrogate import ConstantSurrogate, Surrogate, SurrogateCache, fit_surrogate, fit_surrogate_2d

ENGINE_VERSION = "1"
CACHE_ENV = "KLEINVOL_CACHE_DIR"


@dataclass(frozen=True)
class EngineConfig:
    order: int = 20
    width: float = 4.0
    max_subdivisions: int = 3
    surrogate_degree: int = 24
    surrogate_width: float = 8.0
    surrogate_max_panels: int = 512
    cache: bool = True
    cache_dir: Optional[str] = None
    precision: Precision = DOUBLE
    # "dilog" uses the closed-form V^-_{1,1}; "log-part" drops its
    # Li2(-sinh^2(eps/2)/cosh^2(L/4)) term (diagnostic only)
    klein_seed: str = "dilog"

    def __post_init__(self) -> None:
        if self.order < 4 or self.width <= 0 or self.max_subdivisions < 0:
            raise DomainError("invalid quadrature settings")
        if self.surrogate_degree < 4 or self.surrogate_width <= 0 or self.surrogate_max_panels < 1:
            raise DomainError("invalid surrogate settings")
        if not isinstance(self.precision, Precision):
            object.__setattr__(self, "precision", Precision(int(self.precision)))
        if self.precision.extended:
            raise DomainError("the recursion engine runs in double precision; use wp_volume for exact b=0 work")
        if self.klein_seed not in ("dilog", "log-part"):
            raise DomainError(f"unknown klein_seed {self.klein_seed!r}")


@dataclass(frozen=True)
class VolumeQuery:
    top: Topology
    lengths: tuple
    eps: RegEps
    b: float = 1.0
    tol: float = 1e-9

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", as_eps(self.eps))
        ls = tuple(float(v) for v in np.atleast_1d(self.lengths))
        if len(ls) != self.top.n:
            raise DomainError(f"{self.top} needs {self.top.n} lengths, got {len(ls)}")
        if any(not (math.isfinite(v) and v >= 0) for v in ls):
            raise DomainError("lengths must be finite and non-negative")
        object.__setattr__(self, "lengths", ls)
        if not (math.isfinite(self.b) and self.b >= 0):
            raise DomainError("b must be finite and non-negative")
        if not (0 < self.tol < 1):
            raise DomainError("tol must lie in (0, 1)")
        self.top.require_stable()


@dataclass
class VolumeResult:
    value: float
    error: float
    path: str
    parts: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# vectorised chi = -1 seeds


def _vm_half2(p, q, e: RegEps):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return logcosh((p + q) / 4) + logcosh((p - q) / 4) - 2.0 * e.log_sinh_half


def _vm_11(p, e: RegEps, seed: str):
    p = np.asarray(p, dtype=float)
    lx = 2.0 * (logcosh(p / 4) - e.log_sinh_half)
    out = 0.5 * lx * lx + PI2 / 6
    if seed == "dilog":
        out = out + dilog(-np.exp(-lx))
    return out


def _vp_11(p):
    p = np.asarray(p, dtype=float)
    return p * p / 48.0 + PI2 / 12.0


def seed_value(sector: str, b: float, top: Topology, p, rest: Sequence[float], e: RegEps, seed: str = "dilog"):
    """chi = -1 volume with first slot p (array) and the other slots frozen."""
    p = np.asarray(p, dtype=float)
    if top == T03:
        return np.full(p.shape, 1.0 if sector == "total" else 0.0)
    if top == T_HALF2:
        vm = _vm_half2(p, rest[0], e)
        return b * vm if sector == "total" else vm
    if top == T11:
        vm = _vm_11(p, e, seed)
        if sector == "minus":
            return vm
        vp = _vp_11(p)
        return (1 + b) * vp - b * b * (vp - vm)
    raise DomainError(f"{top} is not a chi=-1 topology")


def seed_value_2d(sector: str, b: float, top: Topology, p, q, rest, e: RegEps):
    p, q = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    if top == T03:
        return np.full(p.shape, 1.0 if sector == "total" else 0.0)
    if top == T_HALF2:
        vm = _vm_half2(p, q, e)
        return b * vm if sector == "total" else vm
    raise DomainError(f"{top} has fewer than two boundaries or is not chi=-1")


# ---------------------------------------------------------------------------
# truncation


def growth_degree(top: Topology) -> int:
    """Power of p bounding the growth of V(p, ...), plus one for log factors."""
    return max(0, math.ceil(3 * top.twice_g - 6 + 2 * top.n)) + 1


def tail_radius(degree: int, tol: float) -> float:
    """x with 2 (1+x)^(degree+3) e^{-x/2} <= tol; every kernel decays like
    e^{-(p - L0 - L_i)/2}, so the cutoff is L0 + max L_i + x."""
    x = 20.0
    for _ in range(50):
        nx = 2.0 * (math.log(2.0 / tol) + (degree + 3) * math.log1p(x))
        if abs(nx - x) < 1e-6:
            break
        x = nx
    return x


def _ceil16(x: float) -> float:
    return 16.0 * math.ceil(x / 16.0)


# ---------------------------------------------------------------------------
# kernel-weighted integrals; all return (value, error) arrays over L0s


def _rows(L0s):
    L0s = np.atleast_1d(np.asarray(L0s, dtype=float))
    return L0s, L0s == 0.0


def _tail(mat_abs_last):
    return 4.0 * mat_abs_last


def integrate_R(L0s, Li: float, f: Callable, P: float, order: int = 20, width: float = 4.0, dx0: bool = False):
    """int_0^P p R(L0, Li, p) f(p) dp for each L0 (or d/dL0 at 0 when dx0)."""
    L0s = np.atleast_1d(np.asarray(L0s, dtype=float))

    def one(m):
        r = composite(0.0, P, m, width)
        fv = np.asarray(f(r.nodes), dtype=float)
        if dx0:
            K = np.broadcast_to(kernel_R_dx0(Li, r.nodes), (len(L0s), len(r)))
        else:
            K = kernel_R(L0s[:, None], Li, r.nodes[None, :])
        integrand = K * (r.nodes * fv)[None, :]
        return integrand @ r.weights, np.abs(integrand) @ r.weights, np.abs(integrand[:, -1])

    hi, absint, last = one(order)
    lo, _, _ = one(lower_order(order))
    return hi, np.abs(hi - lo) + _tail(last), absint


def integrate_Ecal(L0s, f: Callable, eps, P: float, order: int = 20, width: float = 4.0, dx0: bool = False):
    """int_0^P p Ecal(L0, p; eps) f(p) dp for each L0."""
    L0s = np.atleast_1d(np.asarray(L0s, dtype=float))
    e = as_eps(eps)

    def one(m):
        r = composite(0.0, P, m, width)
        fv = np.asarray(f(r.nodes), dtype=float)
        if dx0:
            K = np.broadcast_to(kernel_Ecal_dx0(r.nodes, e), (len(L0s), len(r)))
        else:
            K = kernel_Ecal(L0s[:, None], r.nodes[None, :], e)
        integrand = K * (r.nodes * fv)[None, :]
        return integrand @ r.weights, np.abs(integrand) @ r.weights, np.abs(integrand[:, -1])

    hi, absint, last = one(order)
    lo, _, _ = one(lower_order(order))
    return hi, np.abs(hi - lo) + _tail(last), absint


def _D_profile(L0s, s, dx0):
    if dx0:
        return np.broadcast_to(kernel_D_dx0(s, 0.0), (len(L0s), len(s)))
    return kernel_D(L0s[:, None], s[None, :], 0.0)


def integrate_D(L0s, h: Callable, P: float, order: int = 20, width: float = 4.0, dx0: bool = False,
                method: str = "simplex"):
    """1/2 int int_{p,q >= 0, p+q <= P} p q D(L0, p, q) h(p, q) dp dq for each L0.

    ``method="simplex"``: s = p + q outer, p in [0, s] inner, so the
    p-integral H(s) is shared by every L0.  ``method="tensor"``: product rule
    over the square [0, P]^2 with D evaluated at every (p, q).
    """
    L0s = np.atleast_1d(np.asarray(L0s, dtype=float))

    def one(m):
        rs = composite(0.0, P, m, width)
        if method == "simplex":
            k, pp, ww = simplex_rule(rs.nodes, m, width)
            qq = rs.nodes[k] - pp
            hv = np.asarray(h(pp, qq), dtype=float)
            H = np.bincount(k, weights=ww * pp * qq * hv, minlength=len(rs))
            Habs = np.bincount(k, weights=ww * np.abs(pp * qq * hv), minlength=len(rs))
            Dk = _D_profile(L0s, rs.nodes, dx0)
            integrand = Dk * H[None, :]
            return (0.5 * integrand @ rs.weights, 0.5 * np.abs(Dk * Habs[None, :]) @ rs.weights,
                    0.5 * np.abs(integrand[:, -1]))
        if method == "tensor":
            x = rs.nodes
            PP, QQ = np.meshgrid(x, x, indexing="ij")
            W = np.outer(rs.weights, rs.weights)
            hv = np.asarray(h(PP, QQ), dtype=float)
            base = W * PP * QQ * hv
            vals, absv = [], []
            for L0 in L0s:
                Dm = kernel_D_dx0(PP, QQ) if dx0 else kernel_D(L0, PP, QQ)
                vals.append(0.5 * np.sum(Dm * base))
                absv.append(0.5 * np.sum(np.abs(Dm * base)))
            edge = np.zeros(len(L0s))
            return np.array(vals), np.array(absv), edge
        raise DomainError(f"unknown D-term method {method!r}")

    hi, absint, last = one(order)
    lo, _, _ = one(lower_order(order))
    return hi, np.abs(hi - lo) + _tail(last), absint


# ---------------------------------------------------------------------------
# topology bookkeeping


def _splits(top: Topology, rest: Sequence[float]):
    """Ordered stable splits (t1, I, t2, J) for the D-term."""
    idx = range(len(rest))
    out = []
    for tg1 in range(top.twice_g + 1):
        tg2 = top.twice_g - tg1
        for r in range(len(rest) + 1):
            for I in combinations(idx, r):
                J = tuple(j for j in idx if j not in I)
                t1n, t2n = len(I) + 1, len(J) + 1
                if 2 - tg1 - t1n < 0 and 2 - tg2 - t2n < 0:
                    out.append((Topology(tg1, t1n), I, Topology(tg2, t2n), J))
    return out


def _maybe(tg: int, n: int) -> Optional[Topology]:
    if tg < 0:
        return None
    t = Topology(tg, n)
    return t if t.stable else None


class Engine:
    """Recursion evaluator for one sector (``"total"`` at a given b, or ``"minus"``)."""

    def __init__(self, eps, b: float = 1.0, sector: str = "total", config: Optional[EngineConfig] = None,
                 cache: Optional[SurrogateCache] = None, tol: float = 1e-9):
        if sector not in ("total", "minus"):
            raise DomainError(f"unknown sector {sector!r}")
        self.eps = as_eps(eps)
        self.b = 0.0 if sector == "minus" else float(b)
        self.sector = sector
        self.config = config or EngineConfig()
        if cache is None:
            cdir = self.config.cache_dir or os.environ.get(CACHE_ENV)
            cache = SurrogateCache(cdir, enabled=self.config.cache)
        self.cache = cache
        self.tol = tol
        self._plus: Optional[Engine] = None

    # -- helpers -----------------------------------------------------------

    @property
    def plus(self) -> "Engine":
        if self._plus is None:
            self._plus = Engine(self.eps, 0.0, "total", self.config, self.cache, self.tol)
        return self._plus

    def _key(self, top: Topology, rest, pmax: float, kind: str) -> dict:
        c = self.config
        return {
            "v": ENGINE_VERSION,
            "kind": kind,
            "sector": self.sector,
            "b": repr(self.b),
            "eps": repr(self.eps.eps),
            "top": [top.twice_g, top.n],
            "rest": [repr(round(float(x), 12)) for x in rest],
            "pmax": pmax,
            "tol": repr(self.tol),
            "quad": [c.order, c.width, c.max_subdivisions],
            "sur": [c.surrogate_degree, c.surrogate_width],
            "seed": c.klein_seed,
        }

    def family(self, top: Optional[Topology], rest: Sequence[float], pmax: float):
        """p -> V(p, rest) on [0, pmax]; None for unstable topologies."""
        if top is None or not top.stable:
            return None
        rest = tuple(float(x) for x in rest)
        if top.chi == -1:
            sector, b, e, seed = self.sector, self.b, self.eps, self.config.klein_seed
            return ConstantSurrogate(lambda p: seed_value(sector, b, top, p, rest, e, seed),
                                     provenance={"top": str(top), "closed_form": True})
        pmax = _ceil16(pmax)
        c = self.config

        def build():
            return fit_surrogate(
                lambda p: self.evaluate(top, p, rest)[0],
                pmax,
                0.1 * self.tol,
                degree=c.surrogate_degree,
                width=c.surrogate_width,
                max_panels=c.surrogate_max_panels,
                provenance={"top": str(top), "rest": list(rest), "sector": self.sector, "b": self.b,
                            "eps": self.eps.eps},
            )

        return self.cache.get_or_build(self._key(top, rest, pmax, "1d"), build)

    def family2d(self, top: Optional[Topology], rest: Sequence[float], pmax: float):
        """(p, q) -> V(p, q, rest)."""
        if top is None or not top.stable:
            return None
        rest = tuple(float(x) for x in rest)
        if top.chi == -1:
            sector, b, e = self.sector, self.b, self.eps
            f = lambda p, q: seed_value_2d(sector, b, top, p, q, rest, e)
            f.residual = 0.0
            return f
        pmax = _ceil16(pmax)

        def build():
            return fit_surrogate_2d(
                lambda q: self.family(top, (q,) + rest, pmax),
                lambda p, q: self.evaluate(top, p, (q,) + rest)[0],
                pmax,
                0.1 * self.tol,
                width=self.config.surrogate_width,
                provenance={"top": str(top), "rest": list(rest)},
            )

        key = self._key(top, rest, pmax, "2d")
        return self.cache.get_or_build(key, build)

    # -- recursion -----------------------------------------------------------

    def evaluate(self, top: Topology, L0s, rest: Sequence[float]):
        """Return (values, errors, parts) for V(L0, rest) over an array of L0."""
        top.require_stable()
        rest = tuple(float(x) for x in rest)
        if len(rest) != top.n - 1:
            raise DomainError(f"{top} needs {top.n - 1} frozen lengths, got {len(rest)}")
        L0s = np.atleast_1d(np.asarray(L0s, dtype=float))
        if top.chi == -1:
            v = seed_value(self.sector, self.b, top, L0s, rest, self.eps, self.config.klein_seed)
            return v, np.zeros_like(v), {"closed_form": v}
        width = self.config.width
        for attempt in range(self.config.max_subdivisions + 1):
            vals, errs, parts, diag = self._rhs(top, L0s, rest, width)
            scale = np.maximum(np.abs(vals), 1e-300)
            if np.all(errs <= self.tol * np.maximum(scale, 1.0)):
                break
            width *= 0.5
        else:
            raise ConvergenceError(
                f"{top} at {rest}: error {float(np.max(errs / np.maximum(np.abs(vals), 1.0))):.2e} "
                f"above tol {self.tol:g} after {self.config.max_subdivisions} subdivisions"
            )
        parts["diagnostics"] = diag
        return vals, errs, parts

    def _rhs(self, top: Topology, L0s: np.ndarray, rest: tuple, width: float):
        order = self.config.order
        zero = L0s == 0.0
        big = max(float(L0s.max()), 0.0) + (max(rest) if rest else 0.0)
        P = big + tail_radius(growth_degree(top), 0.01 * self.tol)
        n = len(L0s)
        parts = {"R": np.zeros(n), "D": np.zeros(n), "E": np.zeros(n)}
        err = np.zeros(n)

        def both(fn, *args, **kw):
            v, e_, a = fn(L0s, *args, order=order, width=width, **kw)
            if zero.any():
                v0, e0, a0 = fn(L0s[zero], *args, order=order, width=width, dx0=True, **kw)
                v = v.copy(); e_ = e_.copy(); a = a.copy()
                v[zero], e_[zero], a[zero] = v0, e0, a0
            return v, e_, a

        # R-terms
        for i, Li in enumerate(rest):
            others = rest[:i] + rest[i + 1:]
            t = _maybe(top.twice_g, top.n - 1)
            f = self._inner_R(t, others, P)
            if f is None:
                continue
            v, e_, a = both(integrate_R, Li, f, P)
            parts["R"] += v
            err += e_ + getattr(f, "residual", 0.0) * a

        # D-term
        h, hres = self._inner_D(top, rest, P)
        if h is not None:
            v, e_, a = both(integrate_D, h, P)
            parts["D"] += v
            err += e_ + hres * a

        # E-term
        f, coef = self._inner_E(top, rest, P)
        if f is not None and coef != 0.0:
            v, e_, a = both(integrate_Ecal, f, self.eps, P)
            parts["E"] += coef * v
            err += abs(coef) * (e_ + getattr(f, "residual", 0.0) * a)

        total = parts["R"] + parts["D"] + parts["E"]
        denom = np.where(zero, 1.0, L0s)
        vals = total / denom
        errs = err / denom
        for k in parts:
            parts[k] = parts[k] / denom
        return vals, errs, parts, {"P": P, "width": width}

    # the three inner integrands, per sector

    def _inner_R(self, t, others, P):
        return self.family(t, others, P)

    def _inner_E(self, top, rest, P):
        t = _maybe(top.twice_g - 1, top.n)
        if t is None:
            return None, 0.0
        if self.sector == "total":
            return self.family(t, rest, P), self.b
        fm = self.family(t, rest, P)
        fp = self.plus.family(t, rest, P) if t.integer_genus else None
        if fp is None:
            return fm, 1.0
        f = lambda p: fm(p) + fp(p)
        f.residual = max(fm.residual, fp.residual)
        return f, 1.0

    def _inner_D(self, top, rest, P):
        terms2 = []  # (coef, 2d family)
        prods = []  # (coef, f1, I-family on p, f2 on q)
        tD = _maybe(top.twice_g - 2, top.n + 1)
        if tD is not None:
            if self.sector == "total":
                terms2.append((1.0 + self.b, self.family2d(tD, rest, P)))
            else:
                terms2.append((2.0, self.family2d(tD, rest, P)))
                if tD.integer_genus:
                    terms2.append((1.0, self.plus.family2d(tD, rest, P)))
        for t1, I, t2, J in _splits(top, rest):
            LI = tuple(rest[i] for i in I)
            LJ = tuple(rest[j] for j in J)
            if self.sector == "total":
                prods.append((1.0, self.family(t1, LI, P), self.family(t2, LJ, P)))
            else:
                m1, m2 = self.family(t1, LI, P), self.family(t2, LJ, P)
                p1 = self.plus.family(t1, LI, P) if t1.integer_genus else None
                p2 = self.plus.family(t2, LJ, P) if t2.integer_genus else None
                prods.append((1.0, m1, m2))
                if p2 is not None:
                    prods.append((1.0, m1, p2))
                if p1 is not None:
                    prods.append((1.0, p1, m2))
        terms2 = [(c, f) for c, f in terms2 if f is not None]
        prods = [(c, f, g) for c, f, g in prods if f is not None and g is not None]
        if not terms2 and not prods:
            return None, 0.0

        def h(p, q):
            out = np.zeros(np.broadcast(p, q).shape)
            for c, f in terms2:
                out = out + c * f(p, q)
            for c, f, g in prods:
                out = out + c * f(p) * g(q)
            return out

        res = max([getattr(f, "residual", 0.0) for _, f in terms2]
                  + [getattr(f, "residual", 0.0) + getattr(g, "residual", 0.0) for _, f, g in prods])
        return h, res


# ---------------------------------------------------------------------------
# public entry points


def _engine_for(q: VolumeQuery, sector: str, config, cache) -> Engine:
    return Engine(q.eps, q.b, sector, config, cache, tol=q.tol)


def total_volume(q: VolumeQuery, config: Optional[EngineConfig] = None,
                 cache: Optional[SurrogateCache] = None) -> VolumeResult:
    """b-weighted volume V^{eps,b}; chi = -1 dispatches to the closed forms."""
    if q.top.chi == -1:
        v = total_chi1(q.top, q.lengths, q.eps, q.b)
        return VolumeResult(v, 0.0, "closed-form")
    eng = _engine_for(q, "total", config, cache)
    vals, errs, parts = eng.evaluate(q.top, [q.lengths[0]], q.lengths[1:])
    return VolumeResult(
        float(vals[0]), float(errs[0]), "recursion",
        {k: float(v[0]) for k, v in parts.items() if k in ("R", "D", "E")},
        {"P": parts["diagnostics"]["P"], "width": parts["diagnostics"]["width"],
         "surrogate_builds": eng.cache.builds, "cache_hits": eng.cache.hits},
    )


def v_minus(q: VolumeQuery, config: Optional[EngineConfig] = None,
            cache: Optional[SurrogateCache] = None) -> VolumeResult:
    """Non-orientable volume V^{-,eps} from its own signed recursion (b is ignored)."""
    if q.top.chi == -1:
        return VolumeResult(v_minus_chi1(q.top, q.lengths, q.eps), 0.0, "closed-form")
    eng = _engine_for(q, "minus", config, cache)
    vals, errs, parts = eng.evaluate(q.top, [q.lengths[0]], q.lengths[1:])
    return VolumeResult(
        float(vals[0]), float(errs[0]), "recursion",
        {k: float(v[0]) for k, v in parts.items() if k in ("R", "D", "E")},
        {"P": parts["diagnostics"]["P"]},
    )


def build_surrogate(q: VolumeQuery, slot: int = 0, pmax: Optional[float] = None,
                    config: Optional[EngineConfig] = None, cache: Optional[SurrogateCache] = None,
                    sector: str = "total") -> Surrogate:
    """Fit p -> V(lengths with lengths[slot] = p) on [0, pmax].

    Slot 0 is evaluated in batches through the recursion; other slots are
    evaluated point by point.
    """
    if not 0 <= slot < q.top.n:
        raise DomainError(f"slot {slot} out of range for {q.top}")
    cfg = config or EngineConfig()
    eng = _engine_for(q, sector, cfg, cache)
    if pmax is None:
        pmax = _ceil16(max(q.lengths) + tail_radius(growth_degree(q.top), q.tol))
    ls = list(q.lengths)

    if slot == 0:
        fn = lambda p: eng.evaluate(q.top, p, ls[1:])[0]
    else:
        def fn(p):
            out = []
            for x in np.atleast_1d(p):
                l2 = ls.copy()
                l2[slot] = float(x)
                out.append(eng.evaluate(q.top, [l2[0]], l2[1:])[0][0])
            return np.array(out)

    return fit_surrogate(fn, pmax, q.tol, degree=cfg.surrogate_degree, width=cfg.surrogate_width,
                         max_panels=cfg.surrogate_max_panels,
                         provenance={"top": str(q.top), "slot": slot, "lengths": ls, "b": q.b,
                                     "eps": q.eps.eps, "sector": sector})


def b_polynomial_fit(top: Topology, lengths, eps, bs=(0.0, 0.25, 0.5, 0.75, 1.0), tol: float = 1e-9,
                     config: Optional[EngineConfig] = None):
    """Fit total volumes at several b by a polynomial of degree <= 2g.

    Returns (coefficients in increasing degree, max relative residual).
    """
    deg = min(top.twice_g, len(bs) - 1)
    vals = np.array([total_volume(VolumeQuery(top, tuple(lengths), eps, b, tol), config).value for b in bs])
    coef = np.polynomial.polynomial.polyfit(bs, vals, deg)
    fit = np.polynomial.polynomial.polyval(bs, coef)
    return coef, float(np.max(np.abs(fit - vals) / np.maximum(np.abs(vals), 1.0)))
