"""
Error hierarchy for the link simulator.

Numerical preconditions raise ``InvalidParameterError`` / ``DimensionMismatchError``
(both are also ``ValueError`` so plain callers can catch them generically).
The management command turns any ``SimulationError`` into a ``CommandError``.
"""


class SimulationError(Exception):
    """Base class for every error raised by the simulation app."""


class InvalidParameterError(SimulationError, ValueError):
    """A physical or numerical parameter violates its precondition."""


class DimensionMismatchError(SimulationError, ValueError):
    """Vector / matrix shapes do not agree with the RIS size."""


class DegenerateRetractionError(SimulationError, ArithmeticError):
    """SVD retraction was asked to map a rank-deficient matrix."""


class ConfigError(SimulationError):
    """An experiment configuration is invalid; raised before any trial runs."""


class OutputError(SimulationError, OSError):
    """Writing a result file failed."""

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")
