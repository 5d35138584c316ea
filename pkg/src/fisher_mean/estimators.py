"""Mean estimators: baselines, parameter derivation, and the global pipeline.

The headline estimator runs in three stages on a disjoint split of the n
input samples (sizes floor(n/xi), floor(n/xi), and the remainder):

1. a crude symmetric initializer mu_1 = median of consecutive pairwise means;
2. a KDE of the r-smoothed density fitted on fresh samples, centered at mu_1,
   with the clipped symmetrized score and its plug-in Fisher estimate I-hat
   (the stage failure budget is delta/xi, which sets the clip level T);
3. one Newton-style correction: each remaining sample is perturbed with fresh
   N(0, r^2) noise, the symmetrized score is averaged at the perturbed
   points, and mu-hat = mu_1 - eps-hat with
   eps-hat = (1/(I-hat * n_3)) * sum_i s-hat_sym(x_i + noise_i).

Auto-scaled parameters derive from the rate eta = (log(1/delta)/n)^(1/13):
xi = max(1/eta, 4) pipeline splits, gamma = 1/eta^2, and bandwidth r = eta *
sigma-hat by default. A bandwidth override above sigma-hat is clamped down
(the theory needs r at most the sample scale); an override below eta *
sigma-hat is honored but recorded as a warning, since benchmark operating
points routinely probe bandwidths below the auto scale.

The estimator needs n >= 2^(13/2) * log(1/delta) ~ 90.5 log(1/delta) so that
eta <= 1/sqrt(2); below that the derived gamma = 1/eta^2 loses meaning and
InsufficientSamples is raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DegenerateFisher,
    InsufficientSamples,
    InvalidConfig,
    SymPointUnset,
    TooFewSamples,
)
from .fisher import FisherEstimate, estimate_fisher
from .kde import fit_kde
from .rng import RngStream

__all__ = [
    "EstimatorConfig",
    "ResolvedParams",
    "EstimateResult",
    "median_pairwise_means",
    "empirical_mean",
    "median_of_means",
    "derive_parameters",
    "local_estimate",
    "global_estimate",
]

# eta must not exceed 1/sqrt(2), i.e. n >= 2^(13/2) log(1/delta)
_MIN_SAMPLES_FACTOR = 2.0 ** 6.5
_DEGENERATE_FISHER_FLOOR = 1e-12


@dataclass(frozen=True)
class EstimatorConfig:
    """User-facing knobs for the global estimator."""

    delta: float = 0.05
    r: Optional[float] = None
    xi: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.delta <= 0.5):
            raise InvalidConfig(f"delta must lie in (0, 1/2], got {self.delta!r}")
        if self.r is not None and not (self.r > 0 and math.isfinite(self.r)):
            raise InvalidConfig(f"r override must be positive and finite, got {self.r!r}")
        if self.xi is not None and not (self.xi > 3 and math.isfinite(self.xi)):
            raise InvalidConfig(f"xi override must exceed 3, got {self.xi!r}")
        if not (isinstance(self.seed, (int, np.integer)) and self.seed >= 0):
            raise InvalidConfig(f"seed must be a non-negative integer, got {self.seed!r}")


@dataclass(frozen=True)
class ResolvedParams:
    """Fully resolved pipeline parameters for a given (n, delta, sigma-hat)."""

    eta: float
    xi: float
    gamma: float
    r: float
    sigma_hat: float
    warnings: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class EstimateResult:
    """Output of the global estimator, mu_hat = mu_1 - eps_hat exactly."""

    mu_hat: float
    mu_1: float
    eps_hat: float
    params: ResolvedParams
    fisher: FisherEstimate
    n1: int
    n2: int
    n3: int
    threshold: float
    stage_delta: float
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "mu_hat": self.mu_hat,
            "mu_1": self.mu_1,
            "eps_hat": self.eps_hat,
            "params": {
                "eta": self.params.eta,
                "xi": self.params.xi,
                "gamma": self.params.gamma,
                "r": self.params.r,
                "sigma_hat": self.params.sigma_hat,
                "warnings": list(self.params.warnings),
            },
            "fisher": {
                "value": self.fisher.value,
                "quadrature_nodes": self.fisher.quadrature_nodes,
                "tail_bound": self.fisher.tail_bound,
            },
            "n1": self.n1,
            "n2": self.n2,
            "n3": self.n3,
            "threshold": self.threshold,
            "stage_delta": self.stage_delta,
            "diagnostics": self.diagnostics,
        }


def _as_samples(samples, minimum: int, what: str) -> np.ndarray:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 1:
        raise TooFewSamples(f"{what} expects a 1-D sample collection")
    if arr.size < minimum:
        raise TooFewSamples(f"{what} needs at least {minimum} samples, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidConfig(f"{what} requires finite samples")
    return arr


def median_pairwise_means(samples) -> float:
    """Median of means of consecutive sample pairs (odd trailing one dropped).

    For symmetric distributions each pairwise mean is a symmetric draw around
    the true mean with finite-median concentration, so the median of the
    pairwise means is a robust initializer even when single samples are
    heavy-tailed.
    """
    arr = _as_samples(samples, 2, "median_pairwise_means")
    m = arr.size // 2
    pair_means = 0.5 * (arr[0 : 2 * m : 2] + arr[1 : 2 * m : 2])
    return float(np.median(pair_means))


def empirical_mean(samples) -> float:
    """Plain sample mean with compensated summation."""
    arr = _as_samples(samples, 1, "empirical_mean")
    return math.fsum(arr) / arr.size


def median_of_means(samples, blocks: int) -> float:
    """Median of the means of ``blocks`` consecutive chunks.

    Chunks have size ceil(n/blocks); the last chunk may be short.
    """
    if not (isinstance(blocks, (int, np.integer)) and blocks >= 1):
        raise InvalidConfig(f"blocks must be a positive integer, got {blocks!r}")
    arr = _as_samples(samples, 1, "median_of_means")
    size = math.ceil(arr.size / blocks)
    means = [math.fsum(arr[i : i + size]) / len(arr[i : i + size]) for i in range(0, arr.size, size)]
    return float(np.median(means))


def derive_parameters(
    n: int,
    delta: float,
    sigma_hat: Optional[float] = None,
    r: Optional[float] = None,
    xi: Optional[float] = None,
) -> ResolvedParams:
    """Resolve (eta, xi, gamma, r) for a run on n samples at failure rate delta.

    ``r`` and ``xi`` are optional overrides; ``sigma_hat`` is the sample scale
    used for the bandwidth default and clamp (it may be omitted only when an
    ``r`` override is supplied).
    """
    if not (0.0 < delta <= 0.5):
        raise InvalidConfig(f"delta must lie in (0, 1/2], got {delta!r}")
    if n < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {n}")
    log_inv_delta = math.log(1.0 / delta)
    if n <= _MIN_SAMPLES_FACTOR * log_inv_delta:
        raise InsufficientSamples(
            f"need more than {_MIN_SAMPLES_FACTOR:.1f} * log(1/delta) = "
            f"{_MIN_SAMPLES_FACTOR * log_inv_delta:.1f} samples at delta = {delta}, "
            f"got n = {n}"
        )
    eta = (log_inv_delta / n) ** (1.0 / 13.0)
    if xi is None:
        xi_val = max(1.0 / eta, 4.0)
    else:
        if not (xi > 3 and math.isfinite(xi)):
            raise InvalidConfig(f"xi override must exceed 3, got {xi!r}")
        xi_val = float(xi)
    gamma = 1.0 / (eta * eta)
    warnings = []
    if sigma_hat is None:
        if r is None:
            raise InvalidConfig("sigma_hat is required when r is not overridden")
        sigma_val = math.nan
    else:
        sigma_val = float(sigma_hat)
    if r is None:
        if sigma_val > 0:
            r_val = eta * sigma_val
        else:
            r_val = 1.0
            warnings.append("sample scale is zero; bandwidth fell back to r = 1.0")
    else:
        if not (r > 0 and math.isfinite(r)):
            raise InvalidConfig(f"r override must be positive and finite, got {r!r}")
        r_val = float(r)
        if sigma_val > 0:
            if r_val > sigma_val:
                warnings.append(
                    f"bandwidth override r = {r_val:.6g} exceeds the sample scale "
                    f"sigma-hat = {sigma_val:.6g}; clamped down to sigma-hat"
                )
                r_val = sigma_val
            elif r_val < eta * sigma_val:
                warnings.append(
                    f"bandwidth override r = {r_val:.6g} is below the auto scale "
                    f"eta * sigma-hat = {eta * sigma_val:.6g}; using it as given"
                )
    return ResolvedParams(
        eta=eta,
        xi=xi_val,
        gamma=gamma,
        r=r_val,
        sigma_hat=sigma_val,
        warnings=tuple(warnings),
    )


def _score_batch(kde, x: np.ndarray) -> np.ndarray:
    """Symmetrized scores via the model's bulk path when it offers one."""
    fast = getattr(kde, "symmetrized_scores_fast", None)
    if fast is not None:
        return np.asarray(fast(x), dtype=float)
    return np.asarray(kde.symmetrized_scores(x), dtype=float)


def _fisher_value(fisher) -> float:
    return float(getattr(fisher, "value", fisher))


def _newton_correction(samples: np.ndarray, kde, fisher, stream: RngStream) -> float:
    """eps-hat = (1/(I-hat n)) sum_i s-hat_sym(x_i + N(0, r^2))."""
    info = _fisher_value(fisher)
    if not (info >= _DEGENERATE_FISHER_FLOOR):
        raise DegenerateFisher(
            f"Fisher estimate {info!r} is below {_DEGENERATE_FISHER_FLOOR}; "
            "the correction step is ill-conditioned"
        )
    noise = stream.normal(samples.size, scale=kde.r)
    scores = _score_batch(kde, samples + noise)
    return math.fsum(scores) / (info * samples.size)


def local_estimate(samples, kde, fisher, stream: RngStream) -> float:
    """One Newton-style correction of mu_1 using the symmetrized score.

    ``kde`` may be any object exposing ``r``, ``sym_point``, and
    ``symmetrized_scores(x)`` (a KdeModel does); ``fisher`` is a
    FisherEstimate or a bare positive number.
    """
    arr = _as_samples(samples, 1, "local_estimate")
    if getattr(kde, "sym_point", None) is None:
        raise SymPointUnset("local_estimate needs the KDE's sym_point (mu_1) set")
    eps_hat = _newton_correction(arr, kde, fisher, stream)
    return float(kde.sym_point) - eps_hat


def global_estimate(samples, config: EstimatorConfig, threshold_override=None) -> EstimateResult:
    """Three-stage estimate of the mean of a symmetric distribution.

    ``threshold_override`` replaces the derived clip level T (pass
    ``math.inf`` to disable clipping; used by the clipping ablation).
    """
    arr = _as_samples(samples, 2, "global_estimate")
    n = arr.size
    # resolve the split first (eta and xi need no data; the bandwidth from
    # this pass is discarded, so a placeholder scale is fine)
    pre = derive_parameters(n, config.delta, sigma_hat=1.0, r=config.r, xi=config.xi)
    xi = pre.xi
    n1 = int(n // xi)
    n2 = n1
    n3 = n - n1 - n2
    if n1 < 4:
        raise InsufficientSamples(
            f"stage splits floor(n/xi) = {n1} are too small (need >= 4); "
            f"n = {n}, xi = {xi:.4g}"
        )
    if n3 < 1:
        raise InsufficientSamples(f"no samples left for the correction stage (n = {n}, xi = {xi:.4g})")

    stage1 = arr[:n1]
    stage2 = arr[n1 : n1 + n2]
    stage3 = arr[n1 + n2 :]

    mu_1 = median_pairwise_means(stage1)
    sigma_hat = float(np.std(stage1, ddof=1))
    params = derive_parameters(n, config.delta, sigma_hat=sigma_hat, r=config.r, xi=config.xi)

    stage_delta = config.delta / params.xi
    kde = fit_kde(stage2, params.r, stage_delta, sym_point=mu_1, threshold=threshold_override)
    fisher = estimate_fisher(kde)

    stream = RngStream(config.seed, ("global-estimate", "perturb"))
    eps_hat = _newton_correction(stage3, kde, fisher, stream)
    mu_hat = mu_1 - eps_hat

    diagnostics = {
        "sigma_hat": sigma_hat,
        "warnings": list(params.warnings),
        "seed": int(config.seed),
        "clipping_disabled": threshold_override is not None and math.isinf(threshold_override),
        "fisher_tail_bound": fisher.tail_bound,
    }
    return EstimateResult(
        mu_hat=mu_hat,
        mu_1=mu_1,
        eps_hat=eps_hat,
        params=params,
        fisher=fisher,
        n1=n1,
        n2=n2,
        n3=n3,
        threshold=kde.threshold,
        stage_delta=stage_delta,
        diagnostics=diagnostics,
    )
