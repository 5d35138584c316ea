"""Benchmark harness: repeated-trial experiments, bandwidth sweeps, diagnostics.

``run_trials`` draws M independent sample sets from a chosen distribution,
runs each configured estimator on every set, and reports per-estimator error
quantiles next to the theoretical yardstick

    bound = sqrt(2 log(2/delta) / (n I_r)),

where I_r is the oracle smoothed Fisher information at the resolved
bandwidth. Quantiles use the nearest-rank convention (the ceil(q*M)-th order
statistic). A trial in which an estimator raises is recorded as a NaN error
and counted in the report's failure tally rather than aborting the run.

Trials are reproducible: trial i draws from the dedicated substream
(seed, "trial", i), so reports are invariant to estimator ordering and to the
worker count. Set FISHER_MEAN_WORKERS to parallelize across processes
(default 1).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import (
    DistributionSpec,
    Gaussian,
    GaussianMixture,
    GaussianSawtooth,
    GaussianWithAtoms,
    Laplace,
    mean as spec_mean,
    parse_spec,
    sample,
    spec_id,
    variance as spec_variance,
)
from .errors import (
    EmptySeedList,
    FisherMeanError,
    InvalidConfig,
    QuadratureNotConverged,
)
from .estimators import (
    EstimatorConfig,
    derive_parameters,
    empirical_mean,
    global_estimate,
    median_of_means,
    median_pairwise_means,
)
from .fisher import estimate_fisher  # noqa: F401  (re-exported for consumers)
from .kde import fit_kde
from .quadrature import panel_nodes
from .rng import RngStream
from .smoothing import SmoothedModel, fisher_information_report, theoretical_error_bound

__all__ = [
    "ExperimentConfig",
    "TrialReport",
    "ESTIMATOR_NAMES",
    "bundled_specs",
    "run_trials",
    "fisher_sweep",
    "score_l2_diagnostic",
]

ESTIMATOR_NAMES = (
    "global",
    "global_unclipped",
    "empirical_mean",
    "median_of_means",
    "median_pairwise_means",
)

_QUANTILE_KEYS = ("q50", "q90", "q_1_minus_delta", "q99")


def bundled_specs() -> dict:
    """The standard benchmark distributions, keyed by short name."""
    return {
        "gaussian": Gaussian(0.0, 1.0),
        "laplace": Laplace(0.0, 1.0),
        "mixture": GaussianMixture(((0.5, 0.0, 0.1), (0.5, 0.0, 10.0))),
        "atoms": GaussianWithAtoms(0.98, 0.0, 1.0, ((0.01, -10.0), (0.01, 10.0))),
        "sawtooth": GaussianSawtooth(0.0, 1.0, 0.05),
    }


@dataclass(frozen=True)
class ExperimentConfig:
    """A repeated-trial benchmark run."""

    spec: DistributionSpec
    n: int
    delta: float = 0.05
    trials: int = 100
    seed: int = 0
    estimators: tuple = ("global", "empirical_mean")
    r: Optional[float] = None
    xi: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.spec, str):
            object.__setattr__(self, "spec", parse_spec(self.spec))
        if not isinstance(self.spec, DistributionSpec):
            raise InvalidConfig(f"spec must be a distribution, got {type(self.spec).__name__}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise InvalidConfig(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 < self.delta <= 0.5):
            raise InvalidConfig(f"delta must lie in (0, 1/2], got {self.delta!r}")
        if not (isinstance(self.trials, (int, np.integer)) and self.trials >= 1):
            raise InvalidConfig(f"trials must be a positive integer, got {self.trials!r}")
        if not (isinstance(self.seed, (int, np.integer)) and self.seed >= 0):
            raise InvalidConfig(f"seed must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if not self.estimators:
            raise InvalidConfig("at least one estimator is required")
        for name in self.estimators:
            if name not in ESTIMATOR_NAMES:
                raise InvalidConfig(
                    f"unknown estimator {name!r}; choose from {ESTIMATOR_NAMES}"
                )
        if self.r is not None and not (self.r > 0 and math.isfinite(self.r)):
            raise InvalidConfig(f"r must be positive and finite, got {self.r!r}")
        if self.xi is not None and not (self.xi > 3 and math.isfinite(self.xi)):
            raise InvalidConfig(f"xi must exceed 3, got {self.xi!r}")


@dataclass(frozen=True)
class TrialReport:
    """Results of a repeated-trial run, per estimator."""

    config: ExperimentConfig
    errors: dict  # name -> list of M floats, NaN where the trial failed
    failures: dict  # name -> count of failed trials
    quantiles: dict  # name -> {q50, q90, q_1_minus_delta, q99}
    oracle_fisher: float
    resolved_r: float
    bound: float
    bound_ratio: dict  # name -> q_{1-delta} / bound
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "spec": spec_id(self.config.spec),
            "n": int(self.config.n),
            "delta": self.config.delta,
            "trials": int(self.config.trials),
            "seed": int(self.config.seed),
            "estimators": list(self.config.estimators),
            "resolved_r": self.resolved_r,
            "oracle_fisher": self.oracle_fisher,
            "bound": self.bound,
            "errors": {k: [None if math.isnan(e) else e for e in v] for k, v in self.errors.items()},
            "failures": dict(self.failures),
            "quantiles": self.quantiles,
            "bound_ratio": self.bound_ratio,
            "diagnostics": self.diagnostics,
        }


def nearest_rank_quantile(values, q: float) -> float:
    """ceil(q * M)-th order statistic (1-indexed) of the finite entries."""
    arr = np.asarray([v for v in values if math.isfinite(v)], dtype=float)
    if arr.size == 0:
        return math.nan
    arr.sort()
    rank = max(1, math.ceil(q * arr.size))
    return float(arr[rank - 1])


def _run_estimator(name: str, samples: np.ndarray, cfg: ExperimentConfig, trial_seed: int) -> float:
    if name == "global":
        res = global_estimate(
            samples, EstimatorConfig(delta=cfg.delta, r=cfg.r, xi=cfg.xi, seed=trial_seed)
        )
        return res.mu_hat
    if name == "global_unclipped":
        res = global_estimate(
            samples,
            EstimatorConfig(delta=cfg.delta, r=cfg.r, xi=cfg.xi, seed=trial_seed),
            threshold_override=math.inf,
        )
        return res.mu_hat
    if name == "empirical_mean":
        return empirical_mean(samples)
    if name == "median_of_means":
        blocks = max(1, math.ceil(math.log(1.0 / cfg.delta)))
        return median_of_means(samples, blocks)
    if name == "median_pairwise_means":
        return median_pairwise_means(samples)
    raise InvalidConfig(f"unknown estimator {name!r}")


def _run_one_trial(cfg: ExperimentConfig, index: int) -> dict:
    """All estimators on trial ``index``; returns name -> error (NaN on failure)."""
    stream = RngStream(cfg.seed, ("trial", index))
    samples = sample(cfg.spec, stream.substream("draw"), cfg.n)
    trial_seed = int(stream.substream("estimator-seed").integers(0, 2**62, 1)[0])
    truth = spec_mean(cfg.spec)
    out = {}
    for name in cfg.estimators:
        try:
            est = _run_estimator(name, samples, cfg, trial_seed)
            out[name] = abs(est - truth)
        except FisherMeanError as exc:
            out[name] = math.nan
            out.setdefault("_failures", {})[name] = f"{type(exc).__name__}: {exc}"
    return out


def _resolved_r(cfg: ExperimentConfig) -> float:
    if cfg.r is not None:
        return float(cfg.r)
    sigma = math.sqrt(spec_variance(cfg.spec))
    params = derive_parameters(cfg.n, cfg.delta, sigma_hat=sigma, xi=cfg.xi)
    return params.r


def run_trials(cfg: ExperimentConfig) -> TrialReport:
    """Run cfg.trials independent trials and summarize per-estimator errors."""
    workers = int(os.environ.get("FISHER_MEAN_WORKERS", "1"))
    results = [None] * cfg.trials
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(_run_one_trial, cfg, i) for i in range(cfg.trials)}
            for i, fut in futures.items():
                results[i] = fut.result()
    else:
        for i in range(cfg.trials):
            results[i] = _run_one_trial(cfg, i)

    errors = {name: [res[name] for res in results] for name in cfg.estimators}
    failures = {
        name: sum(1 for res in results if not math.isfinite(res[name]))
        for name in cfg.estimators
    }
    failure_notes = {}
    for res in results:
        for name, note in res.get("_failures", {}).items():
            failure_notes.setdefault(name, note)

    resolved_r = _resolved_r(cfg)
    oracle = fisher_information_report(SmoothedModel(cfg.spec, resolved_r))
    bound = theoretical_error_bound(cfg.n, cfg.delta, oracle.value)

    quantiles = {}
    bound_ratio = {}
    for name in cfg.estimators:
        qs = {
            "q50": nearest_rank_quantile(errors[name], 0.5),
            "q90": nearest_rank_quantile(errors[name], 0.9),
            "q_1_minus_delta": nearest_rank_quantile(errors[name], 1.0 - cfg.delta),
            "q99": nearest_rank_quantile(errors[name], 0.99),
        }
        quantiles[name] = qs
        bound_ratio[name] = qs["q_1_minus_delta"] / bound

    return TrialReport(
        config=cfg,
        errors=errors,
        failures=failures,
        quantiles=quantiles,
        oracle_fisher=oracle.value,
        resolved_r=resolved_r,
        bound=bound,
        bound_ratio=bound_ratio,
        diagnostics={
            "failure_notes": failure_notes,
            "oracle_tail_bound": oracle.tail_bound,
            "workers": workers,
        },
    )


def fisher_sweep(spec: DistributionSpec, r_grid) -> list:
    """Oracle Fisher information across a bandwidth grid.

    Returns one row per bandwidth: {spec_id, r, fisher, tail_bound, error}.
    A non-converged quadrature is recorded in the row, not raised.
    """
    if isinstance(spec, str):
        spec = parse_spec(spec)
    rows = []
    sid = spec_id(spec)
    for r in np.asarray(r_grid, dtype=float):
        row = {"spec_id": sid, "r": float(r), "fisher": math.nan, "tail_bound": math.nan, "error": None}
        try:
            report = fisher_information_report(SmoothedModel(spec, float(r)))
            row["fisher"] = report.value
            row["tail_bound"] = report.tail_bound
        except QuadratureNotConverged as exc:
            row["error"] = f"QuadratureNotConverged: {exc}"
        rows.append(row)
    return rows


def score_l2_diagnostic(spec: DistributionSpec, r: float, n_samples: int, delta: float, seeds) -> float:
    """Mean over seeds of  integral (s-hat_clip - s_r)^2 f_r dx / I_r.

    Measures how close the fitted clipped score is to the oracle smoothed
    score, in the natural (Fisher-normalized) L2(f_r) metric.
    """
    if isinstance(spec, str):
        spec = parse_spec(spec)
    seeds = list(seeds)
    if not seeds:
        raise EmptySeedList("score_l2_diagnostic needs at least one seed")
    oracle = SmoothedModel(spec, r)
    report = fisher_information_report(oracle)
    _, edges = oracle._fisher_cache
    x, w = panel_nodes(edges, oracle.quad.nodes_per_component)
    f, fp = oracle.density_and_derivative(x)
    healthy = f > 1e-300
    s_true = np.zeros_like(x)
    s_true[healthy] = fp[healthy] / f[healthy]
    total = 0.0
    for seed in seeds:
        stream = RngStream(int(seed), ("score-l2",))
        samples = sample(spec, stream.substream("draw"), n_samples)
        kde = fit_kde(samples, r, delta)
        s_hat = kde.clipped_scores_fast(x)
        diff = s_hat - s_true
        total += float(np.sum(w * diff * diff * f)) / report.value
    return total / len(seeds)
