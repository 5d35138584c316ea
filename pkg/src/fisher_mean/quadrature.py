"""Composite Gauss-Legendre quadrature helpers.

All numerical integrals in this package go through these helpers: fixed-order
Gauss-Legendre rules mapped onto explicit panel edges. Callers choose the
edges so that every panel interior is smooth; accuracy then comes from the
polynomial order rather than from adaptive subdivision heuristics.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = ["gauss_legendre", "panel_nodes", "uniform_edges", "merge_breakpoints"]


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the `order`-point rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(int(order))
    return x, w


def panel_nodes(edges, nodes_per_panel: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite rule over consecutive [e_i, e_{i+1}] panels.

    Returns flat arrays (x, w) with ``sum(w * f(x))`` approximating the
    integral over [edges[0], edges[-1]]. Zero-width panels contribute nothing.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("edges must be a 1-D array with at least two entries")
    if np.any(np.diff(edges) < 0):
        raise ValueError("edges must be non-decreasing")
    xg, wg = gauss_legendre(nodes_per_panel)
    lo = edges[:-1]
    half = 0.5 * (edges[1:] - lo)
    mid = lo + half
    # outer: panels, inner: nodes
    x = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return x, w


def uniform_edges(lo: float, hi: float, max_width: float) -> np.ndarray:
    """Evenly spaced panel edges over [lo, hi] with panel width <= max_width."""
    if hi < lo:
        raise ValueError("hi must be >= lo")
    if hi == lo:
        return np.array([lo, hi])
    n = max(1, int(math.ceil((hi - lo) / max_width)))
    return np.linspace(lo, hi, n + 1)


def merge_breakpoints(lo: float, hi: float, points, max_width: float) -> np.ndarray:
    """Uniform edges over [lo, hi] refined to pass through each interior point."""
    base = set(uniform_edges(lo, hi, max_width))
    for p in points:
        if lo < p < hi:
            base.add(float(p))
    return np.array(sorted(base))
