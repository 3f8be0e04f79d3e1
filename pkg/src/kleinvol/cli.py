"""Command line interface.

Every command produces a :class:`ResultRecord`; ``--format json`` prints it as
sorted, indented JSON, the default text format prints the value on the first
line followed by ``key: value`` lines.  ``sweep`` writes CSV instead.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from typing import Any, Optional, Sequence

import mpmath
import numpy as np

from . import __version__, acceptance, identities, kernels, rtr
from .chi1 import Topology
from .engine import CACHE_ENV, ENGINE_VERSION, EngineConfig, VolumeQuery, total_volume, v_minus
from .errors import DomainError, KleinVolError, VerificationError
from .specfun import Precision
from .surrogate import SurrogateCache
from .wp import wp_volume

KERNELS = {
    "R": (kernels.kernel_R, kernels.kernel_R_mp),
    "D": (kernels.kernel_D, kernels.kernel_D_mp),
    "E": (kernels.kernel_E, kernels.kernel_E_mp),
    "F": (kernels.kernel_F, kernels.kernel_F_mp),
    "Ecal": (kernels.kernel_Ecal, kernels.kernel_Ecal_mp),
    "Lambda": (kernels.lambda_upper, kernels.lambda_upper_mp),
}

FORMATS = ("text", "json")


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by all commands; a JSON config file uses the same keys."""

    precision: int = 53           # bits; wp always runs at >= 200
    tol: float = 1e-9
    K: int = 200                  # lattice truncation for the refined recursion
    order: int = 20               # Gauss-Legendre points per quadrature panel
    cache: bool = True
    cache_dir: Optional[str] = None
    format: str = "text"

    def __post_init__(self) -> None:
        Precision(int(self.precision))
        if not 0 < self.tol < 1:
            raise DomainError("tol must lie in (0, 1)")
        if int(self.K) != self.K or self.K < 1:
            raise DomainError("K must be a positive integer")
        if self.format not in FORMATS:
            raise DomainError(f"format must be one of {FORMATS}")
        EngineConfig(order=self.order)

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        if path is None:
            return cls()
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise DomainError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise DomainError("config file must hold a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise DomainError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def engine(self) -> EngineConfig:
        return EngineConfig(order=self.order, cache=self.cache, cache_dir=self.resolved_cache_dir())

    def resolved_cache_dir(self) -> Optional[str]:
        return os.environ.get(CACHE_ENV) or self.cache_dir


@dataclass
class ResultRecord:
    command: list
    inputs: dict
    value: Any
    error: Any
    diagnostics: dict = field(default_factory=dict)
    version: str = f"{__version__}+engine{ENGINE_VERSION}"
    wall_time: float = 0.0

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = [_text(self.value)]
        lines.append(f"error: {_text(self.error)}")
        for k in sorted(self.diagnostics):
            lines.append(f"{k}: {_text(self.diagnostics[k])}")
        return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating, mpmath.mpf)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    return str(x)


def _text(x) -> str:
    x = _jsonable(x)
    if isinstance(x, (dict, list)):
        return json.dumps(x, sort_keys=True)
    return str(x)


# ---------------------------------------------------------------------------
# commands


def _parse_topology(s: str) -> Topology:
    try:
        g, n = s.split(",")
        return Topology.of(Fraction(g.strip()), int(n))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"topology must look like '1,1' or '1/2,2', got {s!r}") from exc


def cmd_kernel(a, cfg: RunConfig) -> ResultRecord:
    fn, fn_mp = KERNELS[a.name]
    args = list(a.args)
    if len(args) != 3:
        raise DomainError(f"kernel {a.name} takes 3 arguments, got {len(args)}")
    val = fn(*args)
    with mpmath.workprec(max(cfg.precision, 120)):
        ref = fn_mp(*args)
    if cfg.precision > 53:
        # the mp formulas lose at most a few bits to cancellation
        err = float(abs(ref) * mpmath.mpf(2) ** (16 - cfg.precision))
        return ResultRecord([], {"name": a.name, "args": args}, mpmath.nstr(ref, int(cfg.precision * 0.3)),
                            err, {"precision_bits": cfg.precision})
    return ResultRecord([], {"name": a.name, "args": args}, float(val), float(abs(val - ref)),
                        {"precision_bits": 53, "reference_bits": max(cfg.precision, 120)})


def _volume_record(top, lengths, eps, b, sector, cfg: RunConfig, cache=None):
    q = VolumeQuery(top, tuple(lengths), eps, b, cfg.tol)
    fn = total_volume if sector == "total" else v_minus
    return fn(q, cfg.engine(), cache)


def cmd_volume(a, cfg: RunConfig) -> ResultRecord:
    top = Topology(a.twice_g, a.n)
    r = _volume_record(top, a.lengths, a.eps, a.b, a.sector, cfg)
    diag = {"path": r.path, "parts": r.parts}
    diag.update(r.diagnostics)
    return ResultRecord([], {"topology": str(top), "lengths": list(a.lengths), "eps": a.eps, "b": a.b,
                             "sector": a.sector, "tol": cfg.tol}, r.value, r.error, diag)


def cmd_wp(a, cfg: RunConfig) -> ResultRecord:
    top = Topology.of(Fraction(a.g), a.n)
    poly = wp_volume(top, Precision(max(cfg.precision, 200)), a.measure)
    terms = {" ".join(map(str, k)): f"{q}*pi^{2 * j}" for k, (q, j) in sorted(poly.terms.items())}
    return ResultRecord([], {"g": a.g, "n": a.n, "measure": a.measure}, poly.render(), 0.0,
                        {"terms": terms})


def cmd_rtr(a, cfg: RunConfig) -> ResultRecord:
    K = getattr(a, "K", None) or cfg.K
    if a.rtr_cmd == "dictionary":
        top = _parse_topology(a.top)
        d = rtr.check_dictionary_chi1(top, a.L, a.eps, a.b, K)
        return ResultRecord([], {"topology": str(top), "lengths": list(a.L), "eps": a.eps, "b": a.b, "K": K},
                            {"volume_side": d.volume_side, "laplace_side": d.laplace_side,
                             "resummed": d.resummed}, d.residual)
    if a.rtr_cmd == "toy":
        expr, _ = rtr.toy_antidiagonal(a.ordering)
        return ResultRecord([], {"ordering": a.ordering}, str(expr), 0.0)
    p = rtr.RefinedParams(a.b, a.eps, K)
    if a.rtr_cmd == "spectrum":
        sp = rtr.residue_spectrum(p, a.kmax)
        return ResultRecord([], {"eps": a.eps, "b": a.b, "K": K, "kmax": a.kmax},
                            {str(t) + "/2": v for t, v in sp.items()}, 0.0, {"bb": p.bb})
    # recompute
    top = _parse_topology(a.top)
    if top == rtr.T_HALF2:
        pts = [tuple(float(v) for v in s.split(":")) for s in a.samples]
        if any(len(s) != 2 for s in pts):
            raise DomainError("(1/2,2) samples look like z0:z1")
        recs = rtr.rtr_recursion_recompute(Fraction(1, 2), 2, p, pts)
        rows = [{"sample": r.sample, "recursion": r.value, "closed": rtr.omega_half_2_closed(*r.sample, p)}
                for r in recs]
        err = max(abs(r["recursion"] - r["closed"]) / abs(r["closed"]) for r in rows)
        return ResultRecord([], {"topology": str(top), "samples": a.samples, "eps": a.eps, "b": a.b, "K": K},
                            rows, err)
    if top == rtr.T11:
        pts = [float(s) for s in a.samples]
        recs = rtr.rtr_recursion_recompute(1, 1, p, pts)
        closed = rtr.omega_1_1_closed(p)
        lat = recs[0].lattice.poles
        scale: dict[int, float] = {}
        for (t, _), c in closed.poles.items():
            scale[t] = max(scale.get(t, 0.0), abs(c))
        coef = max(abs(lat.get(k, 0.0) - closed.poles.get(k, 0.0)) / scale[k[0]]
                   for k in set(lat) | set(closed.poles))
        rows = [{"sample": r.sample[0], "point_part": r.point_part,
                 "closed_point_part": closed.pieces[0].value(r.sample[0])} for r in recs]
        err = max([coef] + [abs(r["point_part"] / r["closed_point_part"] - 1) for r in rows])
        origin = {f"z^-{m}": lat.get((0, m), 0.0) for m in (4, 2)}
        return ResultRecord([], {"topology": str(top), "samples": a.samples, "eps": a.eps, "b": a.b, "K": K},
                            {"origin": origin, "points": rows}, err, {"pole_coefficient_rel": coef})
    raise DomainError(f"recompute supports (1/2,2) and (1,1), not {top}")


def cmd_identities(a, cfg: RunConfig) -> ResultRecord:
    which = [n for n in ("a2", "a3", "a1") if getattr(a, n)] or ["a2", "a3", "a1"]
    out, err, ok = {}, 0.0, True
    if "a2" in which:
        kmax = a.k_max or 50
        good = all(identities.lemma_a2_check(k) for k in range(1, kmax + 1))
        out["a2"] = {"k_max": kmax, "exact": good}
        ok &= good
    if "a3" in which:
        kmax = a.k_max or 50
        good = all(identities.lemma_a3_check(k) for k in range(1, kmax + 1))
        red = all(identities.lemma_a3_reduction(k).holds for k in range(1, kmax + 1))
        out["a3"] = {"k_max": kmax, "exact": good, "reduction_exact": red}
        ok &= good and red
    if "a1" in which:
        kmax = a.k_max or 10
        K = a.K if a.K is not None else 400
        rows = [identities.lemma_a1_sides(k, a.x, K) for k in range(1, kmax + 1)]
        worst = max(r.residual for r in rows)
        out["a1"] = {"k_max": kmax, "K": K, "X": a.x, "residual": worst,
                     "tail_bound": max(r.tail_bound for r in rows)}
        err = worst
        ok &= worst <= a.threshold
    rec = ResultRecord([], {"checks": which, "k_max": a.k_max}, out, err, {"passed": ok})
    if not ok:
        raise _Failed(rec)
    return rec


def cmd_verify(a, cfg: RunConfig) -> ResultRecord:
    results = acceptance.run_suite(a.suite)
    for c in results:
        print(c.line(), file=sys.stderr)
    rows = [{"number": c.number, "title": c.title, "passed": c.passed, "detail": c.detail,
             "seconds": round(c.seconds, 3)} for c in results]
    ok = all(c.passed for c in results)
    rec = ResultRecord([], {"suite": a.suite}, rows, 0.0,
                       {"passed": ok, "failed": [c.number for c in results if not c.passed]})
    if not ok:
        raise _Failed(rec)
    return rec


def cmd_sweep(a, cfg: RunConfig) -> None:
    top = Topology(a.twice_g, a.n)
    if not 0 <= a.slot < top.n:
        raise DomainError(f"slot must lie in [0, {top.n})")
    if a.num < 2:
        raise DomainError("num must be at least 2")
    base = list(a.lengths)
    cache = SurrogateCache(cfg.resolved_cache_dir(), enabled=cfg.cache)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["L", "value", "error"])
    for L in np.linspace(a.start, a.stop, a.num):
        ls = base.copy()
        ls[a.slot] = float(L)
        r = _volume_record(top, ls, a.eps, a.b, a.sector, cfg, cache)
        w.writerow([repr(float(L)), repr(r.value), repr(r.error)])


class _Failed(Exception):
    def __init__(self, record: ResultRecord):
        self.record = record


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kleinvol", description="Non-orientable and b-weighted hyperbolic surface volumes.")
    ap.add_argument("--format", choices=FORMATS, help="output format (default text)")
    ap.add_argument("--config", help="JSON file with RunConfig keys")
    ap.add_argument("--cache-dir", help=f"surrogate cache directory (env {CACHE_ENV} takes precedence)")
    ap.add_argument("--no-cache", action="store_true", help="disable the surrogate cache")
    ap.add_argument("--tol", type=float, help="target tolerance")
    ap.add_argument("--precision", type=int, help="bits of precision")
    sub = ap.add_subparsers(dest="cmd", required=True)

    k = sub.add_parser("kernel", help="evaluate a gluing kernel")
    k.add_argument("name", choices=sorted(KERNELS))
    k.add_argument("args", type=float, nargs="+")

    def volume_args(p):
        p.add_argument("--twice-g", type=int, required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--lengths", type=float, nargs="+", required=True)
        p.add_argument("--eps", type=float, default=0.5)
        p.add_argument("--b", type=float, default=1.0)
        p.add_argument("--sector", choices=("total", "minus"), default="total")

    v = sub.add_parser("volume", help="b-weighted or non-orientable volume")
    volume_args(v)

    w = sub.add_parser("wp", help="exact Weil-Petersson volume polynomial")
    w.add_argument("g")
    w.add_argument("n", type=int)
    w.add_argument("--measure", choices=("p dp", "dp"), default="p dp")

    r = sub.add_parser("rtr", help="refined topological recursion checks")
    rs = r.add_subparsers(dest="rtr_cmd", required=True)
    d = rs.add_parser("dictionary")
    d.add_argument("--top", required=True, help="'1,1' or '1/2,2'")
    d.add_argument("--L", type=float, nargs="+", required=True)
    rc = rs.add_parser("recompute")
    rc.add_argument("--top", required=True)
    rc.add_argument("--samples", nargs="+", required=True, help="z0 values, or z0:z1 pairs for (1/2,2)")
    sp = rs.add_parser("spectrum")
    sp.add_argument("--kmax", type=int, default=5)
    ty = rs.add_parser("toy")
    ty.add_argument("--ordering", choices=("L1>=L2", "L2>=L1"), default="L1>=L2")
    for p in (d, rc, sp):
        p.add_argument("--eps", type=float, default=0.5)
        p.add_argument("--b", type=float, default=1.0)
        p.add_argument("--K", type=int)

    i = sub.add_parser("identities", help="coefficient identities")
    i.add_argument("--a2", action="store_true")
    i.add_argument("--a3", action="store_true")
    i.add_argument("--a1", action="store_true")
    i.add_argument("--k-max", type=int)
    i.add_argument("--x", type=float, default=math.exp(0.25))
    i.add_argument("--K", type=int)
    i.add_argument("--threshold", type=float, default=1e-8)

    vf = sub.add_parser("verify", help="run acceptance criteria")
    vf.add_argument("--suite", choices=sorted(acceptance.SUITES), default="all")

    sw = sub.add_parser("sweep", help="CSV of volumes along one boundary length")
    volume_args(sw)
    sw.add_argument("--slot", type=int, default=0)
    sw.add_argument("--start", type=float, required=True)
    sw.add_argument("--stop", type=float, required=True)
    sw.add_argument("--num", type=int, default=11)
    return ap


COMMANDS = {"kernel": cmd_kernel, "volume": cmd_volume, "wp": cmd_wp, "rtr": cmd_rtr,
            "identities": cmd_identities, "verify": cmd_verify, "sweep": cmd_sweep}


def _config(a) -> RunConfig:
    cfg = RunConfig.load(a.config)
    over = {}
    if a.format:
        over["format"] = a.format
    if a.cache_dir:
        over["cache_dir"] = a.cache_dir
    if a.no_cache:
        over["cache"] = False
    if a.tol is not None:
        over["tol"] = a.tol
    if a.precision is not None:
        over["precision"] = a.precision
    return replace(cfg, **over) if over else cfg


def _emit(rec: ResultRecord, cfg: RunConfig, stream) -> None:
    print(rec.to_json() if cfg.format == "json" else rec.to_text(), file=stream)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        cfg = _config(a)
        t = time.perf_counter()
        rec = COMMANDS[a.cmd](a, cfg)
        if rec is not None:
            rec.command = argv
            rec.wall_time = round(time.perf_counter() - t, 6)
            _emit(rec, cfg, sys.stdout)
        return 0
    except _Failed as f:
        f.record.command = argv
        _emit(f.record, cfg, sys.stdout)
        return VerificationError.exit_code
    except KleinVolError as exc:
        print(f"kleinvol: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
