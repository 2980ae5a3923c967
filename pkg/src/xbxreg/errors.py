"""Exception types shared across the package."""


class XbxError(Exception):
    """Base class for package-specific errors."""


class InvalidOrderError(XbxError, ValueError):
    """Quadrature order outside the supported range."""


class DomainError(XbxError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ShapeError(XbxError, ValueError):
    """Inconsistent array dimensions."""


class ConvergenceError(XbxError, RuntimeError):
    """A series or iteration failed to converge.

    Carries the partial result and the number of terms evaluated so callers
    can decide whether to fall back to a numerical route.
    """

    def __init__(self, message, partial=None, terms=None):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


class FitError(XbxError, RuntimeError):
    """Model fitting failed; the message carries the optimizer trace."""


class NestingError(XbxError, ValueError):
    """Models supplied to a likelihood-ratio test are not nested."""


class SingularityError(XbxError, ValueError):
    """A matrix required to be invertible is numerically singular."""


class DataError(XbxError, ValueError):
    """Malformed input data (CSV ingestion, response range, missing values)."""
