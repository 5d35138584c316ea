"""Exact oracle for the r-smoothed distribution.

Smoothing a spec with the N(0, r^2) kernel turns every elementary piece into
something Gaussian-like: Gaussian components convolve in closed form, point
atoms become N(loc, r^2), and Laplace / triangular pieces are discretized by
composite Gauss-Legendre quadrature into a cloud of point masses that are then
convolved in closed form. The result is a finite Gaussian mixture surrogate
on which density, density derivative, score, Fisher information, and
Cramér-Rao ratios are plain vectorized sums.

Narrow surrogate terms (bandwidth exactly r) are evaluated with a banded
sweep: terms farther than 13r from a query point contribute a relative
e^{-84.5} and are dropped. Broad terms (true Gaussian components) are few and
evaluated densely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .distributions import DistributionSpec
from .errors import DegenerateTestFunction, DensityUnderflow, QuadratureNotConverged
from .quadrature import panel_nodes, uniform_edges

__all__ = [
    "QuadratureConfig",
    "SmoothedModel",
    "FisherReport",
    "smoothed_pdf",
    "smoothed_pdf_derivative",
    "smoothed_score",
    "fisher_information",
    "fisher_information_report",
    "cramer_rao_ratio",
    "theoretical_error_bound",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
UNDERFLOW_FLOOR = 1e-300
# Kernel contributions beyond this many r are dropped: exp(-13^2/2) ~ 2e-37.
_BAND_HALFWIDTH_R = 13.0
_MAX_REFINEMENTS = 12
_BLOCK = 1024


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature knobs shared by all oracle integrals.

    nodes_per_component: Gauss-Legendre order per panel, both for
        discretizing non-Gaussian components and for the outer Fisher
        integral.
    tail_halfwidth_sigmas: half-width of every outer integration window,
        in units of the smoothed standard deviation.
    abs_tol: refinement stopping tolerance for fisher_information.
    """

    nodes_per_component: int = 64
    tail_halfwidth_sigmas: float = 12.0
    abs_tol: float = 1e-9

    def __post_init__(self):
        if self.nodes_per_component < 2:
            raise ValueError("nodes_per_component must be >= 2")
        if self.tail_halfwidth_sigmas <= 0:
            raise ValueError("tail_halfwidth_sigmas must be positive")
        if self.abs_tol <= 0:
            raise ValueError("abs_tol must be positive")


class FisherReport(NamedTuple):
    """Converged Fisher integral plus its analytic truncation error bound."""

    value: float
    tail_bound: float
    quadrature_nodes: int


class SmoothedModel:
    """Immutable oracle for spec smoothed by the N(0, r^2) kernel."""

    def __init__(self, spec: DistributionSpec, r: float, quad: QuadratureConfig | None = None):
        if not (isinstance(r, (int, float)) and math.isfinite(r) and r > 0):
            raise ValueError("r must be a finite positive real")
        self.spec = spec
        self.r = float(r)
        self.quad = quad if quad is not None else QuadratureConfig()
        self.mu = spec.mean()
        self.sigma2 = spec.variance()
        self.sigma_r = math.sqrt(self.sigma2 + self.r * self.r)
        self._compile()
        self._fisher_cache: tuple[FisherReport, np.ndarray] | None = None

    # -- surrogate construction ------------------------------------------------

    def _compile(self):
        r = self.r
        nodes = self.quad.nodes_per_component
        broad_w, broad_c, broad_s = [], [], []
        narrow_w, narrow_c = [], []
        for comp in self.spec.components():
            if comp.kind == "gauss":
                broad_w.append(comp.weight)
                broad_c.append(comp.a)
                broad_s.append(math.hypot(comp.b, r))
            elif comp.kind == "atom":
                narrow_w.append(comp.weight)
                narrow_c.append(comp.a)
            elif comp.kind == "laplace":
                half = 42.0 * comp.b + 12.0 * r
                width = min(2.0 * r, comp.b / 2.0)
                edges = np.concatenate(
                    [
                        uniform_edges(comp.a - half, comp.a, width),
                        uniform_edges(comp.a, comp.a + half, width)[1:],
                    ]
                )
                y, qw = panel_nodes(edges, nodes)
                dens = np.exp(-np.abs(y - comp.a) / comp.b) / (2.0 * comp.b)
                narrow_w.extend(comp.weight * qw * dens)
                narrow_c.extend(y)
            elif comp.kind == "tri":
                width = min(2.0 * r, comp.b / 2.0)
                edges = np.concatenate(
                    [
                        uniform_edges(comp.a - comp.b, comp.a, width),
                        uniform_edges(comp.a, comp.a + comp.b, width)[1:],
                    ]
                )
                y, qw = panel_nodes(edges, nodes)
                dens = np.maximum(0.0, comp.b - np.abs(y - comp.a)) / (comp.b * comp.b)
                narrow_w.extend(comp.weight * qw * dens)
                narrow_c.extend(y)
            else:  # pragma: no cover - components() only emits the four kinds
                raise ValueError(f"unknown component kind {comp.kind!r}")
        self._broad_w = np.asarray(broad_w, dtype=float)
        self._broad_c = np.asarray(broad_c, dtype=float)
        self._broad_s = np.asarray(broad_s, dtype=float)
        narrow_c = np.asarray(narrow_c, dtype=float)
        narrow_w = np.asarray(narrow_w, dtype=float)
        order = np.argsort(narrow_c, kind="stable")
        self._narrow_c = narrow_c[order]
        self._narrow_w = narrow_w[order]

    # -- core evaluation ---------------------------------------------------------

    def density_and_derivative(self, x) -> tuple[np.ndarray, np.ndarray]:
        """(f_r(x), f_r'(x)) for an array of query points."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        f = np.zeros_like(x)
        fp = np.zeros_like(x)
        for w, c, s in zip(self._broad_w, self._broad_c, self._broad_s):
            z = (x - c) / s
            phi = (w / (s * _SQRT_2PI)) * np.exp(-0.5 * z * z)
            f += phi
            fp += phi * (-z / s)
        if self._narrow_c.size:
            self._add_narrow(x, f, fp)
        return f, fp

    def _add_narrow(self, x, f, fp):
        r = self.r
        cut = _BAND_HALFWIDTH_R * r
        norm = 1.0 / (r * _SQRT_2PI)
        inv_r2 = 1.0 / (r * r)
        centers, weights = self._narrow_c, self._narrow_w
        order = np.argsort(x, kind="stable")
        xs = x[order]
        for start in range(0, xs.size, _BLOCK):
            blk = slice(start, min(start + _BLOCK, xs.size))
            lo = np.searchsorted(centers, xs[blk][0] - cut, side="left")
            hi = np.searchsorted(centers, xs[blk][-1] + cut, side="right")
            if hi <= lo:
                continue
            d = xs[blk][:, None] - centers[None, lo:hi]
            k = (weights[None, lo:hi] * norm) * np.exp(-0.5 * inv_r2 * d * d)
            idx = order[blk]
            f[idx] += k.sum(axis=1)
            fp[idx] += (k * (-d * inv_r2)).sum(axis=1)


def smoothed_pdf(model: SmoothedModel, x):
    """Density of the smoothed distribution at x (scalar or array)."""
    f, _ = model.density_and_derivative(x)
    return float(f[0]) if np.isscalar(x) or np.ndim(x) == 0 else f


def smoothed_pdf_derivative(model: SmoothedModel, x):
    """Derivative of the smoothed density at x (scalar or array)."""
    _, fp = model.density_and_derivative(x)
    return float(fp[0]) if np.isscalar(x) or np.ndim(x) == 0 else fp


def smoothed_score(model: SmoothedModel, x):
    """Score f_r'/f_r at x; raises DensityUnderflow outside representable support."""
    scalar = np.isscalar(x) or np.ndim(x) == 0
    f, fp = model.density_and_derivative(x)
    if np.any(f < UNDERFLOW_FLOOR):
        bad = np.atleast_1d(np.asarray(x, dtype=float))[f < UNDERFLOW_FLOOR]
        raise DensityUnderflow(
            f"smoothed density below {UNDERFLOW_FLOOR:g} at x={bad[0]!r}; "
            "score undefined there"
        )
    s = fp / f
    return float(s[0]) if scalar else s


def _score_tail_bound(r: float, p: float) -> float:
    """Bound on E[s_r^2; tail event of probability <= p] via subgaussianity.

    P(|s_r| >= t) <= 2 exp(-t^2 r^2 / 8), so splitting at t0^2 = (8/r^2) log(2/p)
    gives E[s^2 1_A] <= t0^2 p + (16/r^2) e^{-t0^2 r^2/8} = (8p/r^2)(log(2/p)+1).
    """
    return (8.0 * p / (r * r)) * (math.log(2.0 / p) + 1.0)


def fisher_information_report(model: SmoothedModel) -> FisherReport:
    """Fisher information of f_r with node count and analytic tail bound."""
    if model._fisher_cache is not None:
        return model._fisher_cache[0]
    quad = model.quad
    H = quad.tail_halfwidth_sigmas
    lo = model.mu - H * model.sigma_r
    hi = model.mu + H * model.sigma_r
    n_panels = max(4, int(math.ceil((hi - lo) / (model.r / 2.0))))
    value = None
    for _ in range(_MAX_REFINEMENTS):
        edges = np.linspace(lo, hi, n_panels + 1)
        x, wq = panel_nodes(edges, quad.nodes_per_component)
        f, fp = model.density_and_derivative(x)
        integrand = np.zeros_like(f)
        ok = f >= UNDERFLOW_FLOOR
        integrand[ok] = fp[ok] * fp[ok] / f[ok]
        new_value = float(np.sum(wq * integrand))
        if value is not None and abs(new_value - value) <= quad.abs_tol * max(1.0, abs(new_value)):
            tail = _score_tail_bound(model.r, 1.0 / (H * H))
            report = FisherReport(new_value, tail, x.size)
            model._fisher_cache = (report, edges)
            return report
        value = new_value
        n_panels *= 2
    raise QuadratureNotConverged(
        f"Fisher integral did not stabilize to {quad.abs_tol:g} "
        f"after {_MAX_REFINEMENTS} panel doublings"
    )


def fisher_information(model: SmoothedModel) -> float:
    """Fisher information I_r = E_{f_r}[s_r^2] of the smoothed distribution."""
    return fisher_information_report(model).value


def cramer_rao_ratio(
    model: SmoothedModel,
    g: Callable[[np.ndarray], np.ndarray],
    g_prime: Callable[[np.ndarray], np.ndarray] | None = None,
) -> float:
    """E[g^2] / (E[g'])^2 for an odd test function g; minimized by the score.

    E[g'] is obtained by parts as -E[g * s_r] unless g_prime is supplied, so g
    itself never needs numerical differentiation. All three moments share one
    node set, which makes the Cauchy-Schwarz lower bound 1/I_r hold exactly in
    floating point as well.
    """
    fisher_information_report(model)  # ensure converged node set
    _, edges = model._fisher_cache
    x, wq = panel_nodes(edges, model.quad.nodes_per_component)
    f, fp = model.density_and_derivative(x)
    gx = np.asarray(g(x), dtype=float)
    if gx.shape != x.shape:
        raise ValueError("g must map an array of points to an array of values")
    second_moment = float(np.sum(wq * gx * gx * f))
    if g_prime is not None:
        mean_gp = float(np.sum(wq * np.asarray(g_prime(x), dtype=float) * f))
    else:
        mean_gp = -float(np.sum(wq * gx * fp))
    if abs(mean_gp) < 1e-12:
        raise DegenerateTestFunction(
            f"|E[g']| = {abs(mean_gp):.3g} < 1e-12; test function carries no signal"
        )
    return second_moment / (mean_gp * mean_gp)


def theoretical_error_bound(n: int, delta: float, fisher: float) -> float:
    """High-probability error scale sqrt(2 log(2/delta) / (n * fisher)).

    With probability at least 1 - delta the estimator error should fall
    below a constant multiple of this quantity; benchmark reports divide
    observed quantiles by it.
    """
    if not (isinstance(n, int) and n > 0):
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not (0.0 < delta < 1.0) or math.isnan(delta):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not (fisher > 0.0) or math.isinf(fisher):
        raise ValueError(f"fisher must be positive and finite, got {fisher}")
    return math.sqrt(2.0 * math.log(2.0 / delta) / (n * fisher))
