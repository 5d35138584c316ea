"""Exception taxonomy.

Every failure mode raised by this package derives from :class:`FisherMeanError`,
split into configuration errors (caller passed something invalid) and numerical
errors (a computation could not be completed to spec). The CLI maps the former
to exit code 2 and the latter to exit code 3.
"""


class FisherMeanError(Exception):
    """Base class for all package errors."""


class ConfigError(FisherMeanError):
    """Caller-supplied inputs violate a documented precondition."""


class NumericalError(FisherMeanError):
    """A numerical routine failed to produce a trustworthy value."""


class InvalidConfig(ConfigError):
    """Estimator or experiment configuration is out of range."""


class InvalidClipParams(InvalidConfig):
    """Clip threshold needs N > log(1/delta) >= log 2 and r > 0."""


class InsufficientSamples(ConfigError):
    """Too few samples for the requested split/failure budget."""


class TooFewSamples(ConfigError):
    """An estimator got fewer samples than its minimum."""


class SymPointUnset(ConfigError):
    """Symmetrized score requested on a model without a symmetrization point."""


class EmptySeedList(ConfigError):
    """A diagnostic over seeds was called with no seeds."""


class DensityUnderflow(NumericalError):
    """Density at the query point is below the representable floor."""


class QuadratureNotConverged(NumericalError):
    """Successive quadrature refinements kept disagreeing beyond tolerance."""


class DegenerateTestFunction(NumericalError):
    """Test function has |E[g']| too small to form the ratio."""


class DegenerateFisher(NumericalError):
    """Fisher information estimate too close to zero to divide by."""
