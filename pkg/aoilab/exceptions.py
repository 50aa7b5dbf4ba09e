"""Custom exceptions for aoilab."""


class AoiLabError(Exception):
    """Base exception for all aoilab errors."""

    pass


class ParameterError(AoiLabError, ValueError):
    """Raised when a rate, configuration or sweep parameter is invalid.

    Attributes:
        field: Name of the offending input, when known
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class DomainError(AoiLabError, ValueError):
    """Raised when a density is evaluated outside its support precondition."""

    pass


class InsufficientDataError(AoiLabError):
    """Raised when too few records or samples are available for an estimate."""

    pass


class SamplerExhaustedError(AoiLabError):
    """Raised when a deterministic duration sequence runs out of values."""

    pass


class TraceInvariantError(AoiLabError):
    """Raised when a simulation trace violates one of its identities."""

    pass


class ToleranceExceededError(AoiLabError):
    """Raised when simulated moments disagree with closed forms beyond a threshold.

    Attributes:
        failures: Mapping of quantity name to its relative error
    """

    def __init__(self, message: str, failures: dict[str, float] | None = None):
        super().__init__(message)
        self.failures = failures or {}


class OutputError(AoiLabError, OSError):
    """Raised when an output file cannot be written."""

    pass


__all__ = [
    "AoiLabError",
    "ParameterError",
    "DomainError",
    "InsufficientDataError",
    "SamplerExhaustedError",
    "TraceInvariantError",
    "ToleranceExceededError",
    "OutputError",
]
