"""Exception types shared across the package."""


class PerpcallError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedParameters(PerpcallError, ValueError):
    """Parameters are valid but outside what the closed forms can represent (e.g. d = 0)."""


class RegimeMismatch(PerpcallError, ValueError):
    """A regime-specific formula was called with parameters from the other regime."""


class InvalidBoundaries(PerpcallError, ValueError):
    """Boundary arguments violate the required ordering (e.g. K < h < k)."""


class PenaltyAboveCap(PerpcallError, ValueError):
    """The penalty exceeds the cancellation cap; the contract degenerates to a plain call."""


class NoInteriorCancellation(PerpcallError, RuntimeError):
    """No cancellation boundary strictly above the strike exists for these parameters."""


class BracketExhausted(PerpcallError, RuntimeError):
    """A root bracket could not be established before hitting the search cap."""


class NotConverged(PerpcallError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class OracleMismatch(PerpcallError, RuntimeError):
    """A numerical cross-check disagreed with the closed form beyond tolerance."""
