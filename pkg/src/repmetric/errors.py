"""Exception hierarchy shared across the package."""


class RepmetricError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RepmetricError):
    """Malformed input: bad file, wrong shape, inconsistent parameters."""


class DegenerateRepresentationError(RepmetricError):
    """The representation carries no usable signal for the requested measure."""


class NotPositiveDefiniteError(RepmetricError):
    """Covariance factorization failed even after the jitter schedule."""
