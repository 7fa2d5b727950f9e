"""Exception types shared across the package."""


class PhotonSimError(Exception):
    """Base class for all photonsim errors."""


class ValidationError(PhotonSimError, ValueError):
    """Invalid parameters, pulse data, or configuration."""


class ParseError(ValidationError):
    """Malformed pulse CSV file."""


class NonMonotoneGrid(ParseError):
    """Pulse CSV frequency column is not strictly increasing."""


class ZeroNorm(ValidationError):
    """Sampled pulse has zero L2 norm and cannot be normalized."""


class ShapeMismatch(ValidationError):
    """Array shape does not match the grid it is paired with."""


class ZeroAmplitude(ValidationError):
    """Amplitude matrix is numerically zero; no spectral decomposition exists."""


class WindowTooNarrow(PhotonSimError):
    """Frequency window misses too much pulse or output mass for the
    requested accuracy."""

    def __init__(self, message: str, tail_bound: float = 0.0):
        super().__init__(message)
        self.tail_bound = tail_bound


class NoConvergence(PhotonSimError):
    """Adaptive quadrature exhausted its subdivision budget.

    Carries the best available partial result so callers can inspect how
    far the integrator got, and optionally the grid node that failed.
    """

    def __init__(self, message: str, partial=None, node=None):
        super().__init__(message)
        self.partial = partial
        self.node = node
