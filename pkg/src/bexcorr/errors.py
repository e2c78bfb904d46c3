"""Semantic exception hierarchy shared by all bexcorr modules."""


class BexcorrError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BexcorrError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DivergenceError(BexcorrError, OverflowError):
    """The requested value is infinite (e.g. K(k) as k -> 1)."""


class DegenerateModelError(BexcorrError, ValueError):
    """Model parameters describe a degenerate distribution (r = 1 in a pdf)."""


class DegenerateSampleError(BexcorrError, ValueError):
    """A sample statistic is undefined (zero variance / zero second moment).

    At n >= 2 with continuous data this is a probability-zero event and
    signals caller misuse, so it is raised rather than mapped to a default.
    """


class AccuracyError(BexcorrError, RuntimeError):
    """A numerical routine could not reach its requested tolerance.

    Attributes
    ----------
    achieved : float or None
        Best error estimate actually reached, attached for diagnostics.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(BexcorrError, ValueError):
    """A sweep/CLI configuration is invalid or cannot be parsed."""
