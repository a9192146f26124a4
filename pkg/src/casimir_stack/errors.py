"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class CasimirError(Exception):
    """Base class for every error raised by casimir_stack."""


class DomainError(CasimirError, ValueError):
    """Argument outside the domain of an operation."""


class UnsupportedEvaluationError(CasimirError):
    """The model cannot be evaluated at the requested point."""


class InvalidMediumError(CasimirError):
    """A response function is nonpositive on the imaginary axis."""


class AccuracyError(CasimirError):
    """A numerical procedure did not reach its tolerance."""

    def __init__(self, message: str, estimate: float | None = None, error: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class RoundTripGainError(CasimirError):
    """Cavity round-trip factor (or a log argument) became nonpositive."""

    def __init__(self, message: str, sigma=None, q=None, w=None):
        super().__init__(message)
        self.sigma = sigma
        self.q = q
        self.w = w


class MappingError(CasimirError):
    """The map w -> w n(iw) is not strictly monotone for this medium."""


class BracketError(CasimirError, ValueError):
    """Root bracket does not straddle the target."""


class ClassificationError(CasimirError):
    """Operation requires a different medium class."""


class ConfigError(CasimirError, ValueError):
    """Malformed run configuration."""
