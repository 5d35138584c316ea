"""Finite-sample mean estimation for symmetric distributions via smoothed scores.

The package is organized around one pipeline:

1. :mod:`fisher_mean.distributions` — symmetric test distributions (specs,
   densities, seeded sampling).
2. :mod:`fisher_mean.smoothing` — oracle quantities of the Gaussian-smoothed
   density: score, Fisher information, Cramér–Rao ratios.
3. :mod:`fisher_mean.kde` — kernel density score estimation with clipping and
   symmetrization.
4. :mod:`fisher_mean.fisher` — plug-in Fisher information from a fitted model.
5. :mod:`fisher_mean.estimators` — the three-stage global mean estimator and
   classical baselines.
6. :mod:`fisher_mean.harness` — repeated-trial experiments and diagnostics.

``fisher-mean --help`` exposes the same functionality on the command line.
"""

from .distributions import (
    Gaussian,
    GaussianMixture,
    GaussianSawtooth,
    GaussianWithAtoms,
    Laplace,
    parse_spec,
    sample,
    spec_id,
    variance,
)
from .errors import (
    ConfigError,
    DegenerateFisher,
    DegenerateTestFunction,
    DensityUnderflow,
    EmptySeedList,
    FisherMeanError,
    InsufficientSamples,
    InvalidClipParams,
    InvalidConfig,
    NumericalError,
    QuadratureNotConverged,
    SymPointUnset,
    TooFewSamples,
)
from .estimators import (
    EstimateResult,
    EstimatorConfig,
    ResolvedParams,
    derive_parameters,
    empirical_mean,
    global_estimate,
    local_estimate,
    median_of_means,
    median_pairwise_means,
)
from .fisher import FisherEstimate, estimate_fisher
from .harness import (
    ESTIMATOR_NAMES,
    ExperimentConfig,
    TrialReport,
    bundled_specs,
    fisher_sweep,
    nearest_rank_quantile,
    run_trials,
    score_l2_diagnostic,
)
from .kde import (
    KdeModel,
    clip_threshold,
    clipped_score,
    fit_kde,
    kde_pdf,
    kde_score,
    symmetrized_score,
)
from .rng import RngStream
from .smoothing import (
    SmoothedModel,
    cramer_rao_ratio,
    fisher_information_report,
    smoothed_pdf,
    smoothed_score,
    theoretical_error_bound,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # distributions
    "Gaussian",
    "Laplace",
    "GaussianMixture",
    "GaussianWithAtoms",
    "GaussianSawtooth",
    "parse_spec",
    "sample",
    "spec_id",
    "variance",
    # errors
    "FisherMeanError",
    "ConfigError",
    "NumericalError",
    "InvalidConfig",
    "InvalidClipParams",
    "InsufficientSamples",
    "TooFewSamples",
    "SymPointUnset",
    "EmptySeedList",
    "DensityUnderflow",
    "QuadratureNotConverged",
    "DegenerateTestFunction",
    "DegenerateFisher",
    # oracle smoothing
    "SmoothedModel",
    "smoothed_pdf",
    "smoothed_score",
    "fisher_information_report",
    "cramer_rao_ratio",
    "theoretical_error_bound",
    # kde
    "KdeModel",
    "fit_kde",
    "clip_threshold",
    "kde_pdf",
    "kde_score",
    "clipped_score",
    "symmetrized_score",
    # fisher
    "FisherEstimate",
    "estimate_fisher",
    # estimators
    "EstimatorConfig",
    "EstimateResult",
    "ResolvedParams",
    "derive_parameters",
    "median_pairwise_means",
    "empirical_mean",
    "median_of_means",
    "local_estimate",
    "global_estimate",
    # harness
    "ESTIMATOR_NAMES",
    "ExperimentConfig",
    "TrialReport",
    "bundled_specs",
    "run_trials",
    "fisher_sweep",
    "score_l2_diagnostic",
    "nearest_rank_quantile",
    # rng
    "RngStream",
]
