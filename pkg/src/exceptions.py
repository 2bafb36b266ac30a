"""
Error hierarchy shared by the numerical modules and the CLI.
"""


class MetrologyError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(MetrologyError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class NonIdentifiableError(MetrologyError):
    """The requested parameters cannot be estimated from the given model."""


class EstimationError(MetrologyError):
    """An estimator failed numerically after exhausting its retries."""
