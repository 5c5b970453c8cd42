"""Exception types shared across the package."""


class AdaptiveBOError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(AdaptiveBOError, ValueError):
    """Inputs with incompatible dimensions were combined."""


class NonPositiveDefiniteError(AdaptiveBOError, RuntimeError):
    """Covariance matrix could not be factorized even at maximum jitter."""


class NumericalError(AdaptiveBOError, RuntimeError):
    """A numerical routine produced an invalid result (NaN, negative variance, ...)."""


class SearchFailureError(AdaptiveBOError, RuntimeError):
    """Acquisition maximization found no finite candidate value."""


class UnsupportedDimensionError(AdaptiveBOError, ValueError):
    """Requested dimension exceeds what the quasi-random generator supports."""
