"""Piecewise Chebyshev surrogates for volume families and their cache.

A family is a function of the glued length p with every other boundary
length frozen.  Two-variable families (the D-term's V(p, q, ...)) are built by
nesting: Chebyshev interpolation in q across a set of one-variable
surrogates in p.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .errors import ConvergenceError, DomainError

CACHE_FORMAT = 1

# fixed off-grid probe positions in [-1, 1]; none coincides with a Chebyshev node
_PROBES = np.array([-0.9137, -0.4421, 0.0517, 0.3893, 0.8461])


def _cheb_nodes(deg: int) -> np.ndarray:
    return cheb.chebpts1(deg + 1)


def _vals_to_coeffs(deg: int) -> np.ndarray:
    x = _cheb_nodes(deg)
    V = cheb.chebvander(x, deg)
    return np.linalg.inv(V)


def _clenshaw(C: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Evaluate Chebyshev series row-wise: C has shape (npts, deg+1)."""
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for j in range(C.shape[1] - 1, 0, -1):
        b1, b2 = 2 * t * b1 - b2 + C[:, j], b1
    return t * b1 - b2 + C[:, 0]


@dataclass
class Surrogate:
    """Piecewise Chebyshev approximation of p -> V on [0, pmax]."""

    edges: np.ndarray
    coeffs: np.ndarray  # (panels, deg+1)
    residual: float  # relative error estimate, max over panels
    provenance: dict = field(default_factory=dict)

    @property
    def pmax(self) -> float:
        return float(self.edges[-1])

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        flat = p.reshape(-1)
        if flat.size and (flat.min() < -1e-12 or flat.max() > self.pmax * (1 + 1e-12) + 1e-12):
            raise DomainError(f"surrogate evaluated outside [0, {self.pmax}]")
        idx = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, len(self.edges) - 2)
        a = self.edges[idx]
        b = self.edges[idx + 1]
        t = np.clip((2 * flat - a - b) / (b - a), -1.0, 1.0)
        out = _clenshaw(self.coeffs[idx], t)
        return out.reshape(p.shape) if p.ndim else float(out[0])

    def to_json(self) -> dict:
        return {
            "format": CACHE_FORMAT,
            "edges": self.edges.tolist(),
            "coeffs": self.coeffs.tolist(),
            "residual": self.residual,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Surrogate":
        if d.get("format") != CACHE_FORMAT:
            raise ValueError("cache format mismatch")
        return cls(np.asarray(d["edges"]), np.asarray(d["coeffs"]), float(d["residual"]), d.get("provenance", {}))


class ConstantSurrogate:
    """Exact family given by a vectorised closed form (no fitting)."""

    residual = 0.0

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], pmax: float = math.inf, provenance=None):
        self.fn = fn
        self.pmax = pmax
        self.provenance = provenance or {}

    def __call__(self, p):
        return self.fn(np.asarray(p, dtype=float))


def fit_surrogate(
    fn: Callable[[np.ndarray], np.ndarray],
    pmax: float,
    tol: float,
    degree: int = 24,
    width: float = 8.0,
    max_panels: int = 512,
    provenance: Optional[dict] = None,
) -> Surrogate:
    """Adaptive piecewise Chebyshev fit of a vectorised ``fn`` on [0, pmax].

    Each panel is fitted at first-kind Chebyshev nodes and checked at fixed
    off-grid probes; panels whose relative probe residual (or coefficient
    tail) exceeds ``tol`` are split in two.
    """
    if not pmax > 0:
        raise DomainError("pmax must be positive")
    M = _vals_to_coeffs(degree)
    xs = _cheb_nodes(degree)
    k0 = max(1, math.ceil(pmax / width))
    todo = [(float(a), float(b)) for a, b in zip(np.linspace(0, pmax, k0 + 1)[:-1], np.linspace(0, pmax, k0 + 1)[1:])]
    done: dict[tuple[float, float], tuple[np.ndarray, float]] = {}
    while todo:
        if len(todo) + len(done) > max_panels:
            raise ConvergenceError(f"surrogate needs more than {max_panels} panels (tol={tol:g})")
        A = np.array([a for a, _ in todo])
        B = np.array([b for _, b in todo])
        mid, half = 0.5 * (A + B), 0.5 * (B - A)
        node_pts = mid[:, None] + half[:, None] * xs[None, :]
        probe_pts = mid[:, None] + half[:, None] * _PROBES[None, :]
        allv = np.asarray(fn(np.concatenate([node_pts.ravel(), probe_pts.ravel()])), dtype=float)
        if not np.all(np.isfinite(allv)):
            raise ConvergenceError("non-finite value while fitting surrogate")
        nv = allv[: node_pts.size].reshape(node_pts.shape)
        pv = allv[node_pts.size:].reshape(probe_pts.shape)
        C = nv @ M.T
        nxt = []
        for i, (a, b) in enumerate(todo):
            approx = cheb.chebval(_PROBES, C[i])
            scale = max(1.0, np.max(np.abs(nv[i])))
            res = max(np.max(np.abs(approx - pv[i])), np.sum(np.abs(C[i][-2:]))) / scale
            if res <= tol or b - a < 1e-6:
                done[(a, b)] = (C[i], res)
            else:
                m = 0.5 * (a + b)
                nxt += [(a, m), (m, b)]
        todo = nxt
    keys = sorted(done)
    edges = np.array([keys[0][0]] + [b for _, b in keys])
    coeffs = np.stack([done[k][0] for k in keys])
    residual = 2.0 * max(done[k][1] for k in keys)
    return Surrogate(edges, coeffs, residual, dict(provenance or {}))


class Surrogate2D:
    """V(p, q) by Chebyshev interpolation in q over one-variable surrogates in p."""

    def __init__(self, q_edges: np.ndarray, slices: list[list], degree_q: int, residual: float, provenance=None):
        self.q_edges = np.asarray(q_edges, dtype=float)
        self.slices = slices  # per q-panel, a list of degree_q+1 surrogates in p
        self.degree_q = degree_q
        self.M = _vals_to_coeffs(degree_q)
        self.residual = residual
        self.provenance = provenance or {}

    @property
    def pmax(self) -> float:
        return float(self.q_edges[-1])

    def __call__(self, p, q):
        p, q = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
        shape = p.shape
        p = p.ravel()
        q = q.ravel()
        out = np.empty_like(p)
        idx = np.clip(np.searchsorted(self.q_edges, q, side="right") - 1, 0, len(self.q_edges) - 2)
        for k in np.unique(idx):
            sel = idx == k
            a, b = self.q_edges[k], self.q_edges[k + 1]
            t = np.clip((2 * q[sel] - a - b) / (b - a), -1.0, 1.0)
            vals = np.stack([s(p[sel]) for s in self.slices[k]], axis=1)
            out[sel] = _clenshaw(vals @ self.M.T, t)
        return out.reshape(shape)


def fit_surrogate_2d(
    slice_fn: Callable[[float], Callable[[np.ndarray], np.ndarray]],
    pair_fn: Callable[[np.ndarray, float], np.ndarray],
    pmax: float,
    tol: float,
    degree: int = 16,
    width: float = 8.0,
    fit_1d: Optional[Callable] = None,
    max_panels: int = 128,
    provenance: Optional[dict] = None,
) -> Surrogate2D:
    """Nested fit.  ``slice_fn(q)`` returns the one-variable family at fixed q
    (already a surrogate or closed form); ``pair_fn(p, q)`` evaluates the
    family directly and is only used at probe values of q."""
    xs = _cheb_nodes(degree)
    M = _vals_to_coeffs(degree)
    p_probe = np.linspace(0.0, pmax, 7)
    k0 = max(1, math.ceil(pmax / width))
    e0 = np.linspace(0, pmax, k0 + 1)
    todo = list(zip(e0[:-1], e0[1:]))
    done = {}
    worst = 0.0
    while todo:
        if len(todo) + len(done) > max_panels:
            raise ConvergenceError("two-variable surrogate needs too many panels")
        nxt = []
        for a, b in todo:
            qs = 0.5 * (a + b) + 0.5 * (b - a) * xs
            sl = [slice_fn(float(qq)) for qq in qs]
            tq = _PROBES[[1, 3]]
            exact = np.stack([pair_fn(p_probe, 0.5 * (a + b) + 0.5 * (b - a) * t) for t in tq])
            vals = np.stack([s(p_probe) for s in sl], axis=1)
            C = vals @ M.T
            approx = np.stack([cheb.chebval(t, C.T) for t in tq])
            scale = max(1.0, float(np.max(np.abs(vals))))
            res = float(np.max(np.abs(approx - exact))) / scale
            if res <= tol or b - a < 1e-3:
                done[(a, b)] = sl
                worst = max(worst, res)
            else:
                m = 0.5 * (a + b)
                nxt += [(a, m), (m, b)]
        todo = nxt
    keys = sorted(done)
    edges = np.array([keys[0][0]] + [b for _, b in keys])
    inner = max((getattr(s, "residual", 0.0) for k in keys for s in done[k]), default=0.0)
    return Surrogate2D(edges, [done[k] for k in keys], degree, 2.0 * worst + inner, provenance)


# ---------------------------------------------------------------------------
# cache


def _key_digest(key: dict) -> str:
    return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:32]


class SurrogateCache:
    """In-memory map with optional on-disk persistence of one-variable surrogates.

    Construction is serialised per key so a surrogate is built at most once
    per process; across processes files are written with an atomic rename,
    so a reader sees either no file or a complete one.
    """

    def __init__(self, directory: Optional[os.PathLike] = None, enabled: bool = True):
        self.enabled = enabled
        self.directory = Path(directory) if directory else None
        self._mem: dict[str, object] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()
        self.hits = 0
        self.builds = 0

    def _lock(self, digest: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(digest, threading.Lock())

    def get_or_build(self, key: dict, build: Callable[[], object]):
        if not self.enabled:
            self.builds += 1
            return build()
        digest = _key_digest(key)
        with self._lock(digest):
            if digest in self._mem:
                self.hits += 1
                return self._mem[digest]
            obj = self._load(digest, key)
            if obj is None:
                obj = build()
                self.builds += 1
                self._store(digest, key, obj)
            else:
                self.hits += 1
            self._mem[digest] = obj
            return obj

    def _path(self, digest: str) -> Optional[Path]:
        return self.directory / f"{digest}.json" if self.directory else None

    def _load(self, digest: str, key: dict):
        path = self._path(digest)
        if path is None or not path.exists():
            return None
        try:
            with open(path) as fh:
                d = json.load(fh)
            if d.get("key") != key:
                return None
            return Surrogate.from_json(d["surrogate"])
        except (OSError, ValueError, KeyError):
            return None

    def _store(self, digest: str, key: dict, obj) -> None:
        path = self._path(digest)
        if path is None or not isinstance(obj, Surrogate):
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump({"key": key, "surrogate": obj.to_json()}, fh)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def clear(self) -> None:
        with self._guard:
            self._mem.clear()
