"""Exception types shared across the package."""

__all__ = [
    "ErrorBoundError",
    "BadShapeError",
    "NegativeMassError",
    "NotNormalizedError",
    "ShapeMismatchError",
    "ZeroMassObservationError",
    "DomainError",
    "SamplerExhaustedError",
    "LengthMismatchError",
    "EmptySampleError",
]


class ErrorBoundError(Exception):
    """Base class for every error raised by this package."""


class BadShapeError(ErrorBoundError):
    """A table is ragged, has the wrong rank, or is too small to be a distribution."""


class NegativeMassError(ErrorBoundError):
    """A probability entry is negative."""


class NotNormalizedError(ErrorBoundError):
    """Total mass deviates from one by more than the repairable tolerance."""


class ShapeMismatchError(ErrorBoundError):
    """Two objects that must share a shape do not."""


class ZeroMassObservationError(ErrorBoundError):
    """A conditional was requested where no probability mass is available."""


class DomainError(ErrorBoundError):
    """A scalar argument lies outside its mathematical domain."""


class SamplerExhaustedError(ErrorBoundError):
    """Rejection sampling failed to accept within its attempt budget."""


class LengthMismatchError(ErrorBoundError):
    """Two sequences that must share a length do not."""


class EmptySampleError(ErrorBoundError):
    """An empirical estimate was requested from an empty sample list."""
