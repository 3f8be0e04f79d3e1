"""Composite Gauss-Legendre rules on [0, P] and on triangles p + q = s."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError


@lru_cache(maxsize=64)
def _gl(m: int):
    x, w = leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class Rule:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)


def composite(a: float, b: float, order: int, width: float) -> Rule:
    """Gauss-Legendre of the given order on equal panels no wider than ``width``."""
    if not b > a:
        raise DomainError(f"empty interval [{a}, {b}]")
    if order < 2 or width <= 0:
        raise DomainError("order >= 2 and width > 0 required")
    k = max(1, math.ceil((b - a) / width - 1e-12))
    edges = np.linspace(a, b, k + 1)
    x, w = _gl(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return Rule(nodes, weights)


def simplex_rule(s: np.ndarray, order: int, width: float):
    """For each s_k, a composite rule for p in [0, s_k].

    Returns arrays (k_index, p, weight) flattened over all (k, node) pairs.
    The number of panels for a given s is ceil(s / width).
    """
    s = np.asarray(s, dtype=float)
    x, w = _gl(order)
    ks, ps, ws = [], [], []
    for k, sk in enumerate(s):
        if sk <= 0:
            continue
        r = composite(0.0, float(sk), order, width)
        ks.append(np.full(len(r), k))
        ps.append(r.nodes)
        ws.append(r.weights)
    if not ks:
        return np.zeros(0, int), np.zeros(0), np.zeros(0)
    return np.concatenate(ks), np.concatenate(ps), np.concatenate(ws)


def lower_order(order: int) -> int:
    """Companion order used for the error estimate."""
    return max(2, (2 * order) // 3)
