"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericError -> 3,
DataError -> 4.
"""


class DrillstabError(Exception):
    """Base class for all package errors."""


class DomainError(DrillstabError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigError(DrillstabError, ValueError):
    """Invalid run configuration (CLI flags, config values)."""


class DataError(DrillstabError, ValueError):
    """A dataset violates a contract (too few samples, degenerate values)."""


class IngestionError(DataError):
    """A file could not be parsed into a dataset."""


class InsufficientSamplesError(DataError):
    """An estimator was asked to run on fewer samples than it supports."""


class NumericError(DrillstabError, RuntimeError):
    """A numerical routine failed (divergence, non-convergence, stall)."""


class IntegrationError(NumericError):
    """Time integration produced a non-finite state.

    Carries the last time at which the state was still finite.
    """

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class StallError(NumericError):
    """Sampler acceptance rate collapsed below the configured floor."""

    def __init__(self, message: str, epsilon: float, attempts: int):
        super().__init__(message)
        self.epsilon = epsilon
        self.attempts = attempts
