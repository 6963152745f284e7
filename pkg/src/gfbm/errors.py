"""Exception types shared across the package."""


class GfbmError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GfbmError, ValueError):
    """A parameter or argument lies outside its admissible domain."""


class RegimeError(GfbmError, ValueError):
    """An operation was requested in a regularity regime where it is undefined."""


class InvalidSpec(GfbmError, ValueError):
    """An integral specification violates its integrability constraints."""


class NonConvergence(GfbmError, RuntimeError):
    """A numerical routine exhausted its budget without reaching tolerance."""


class QuadratureError(GfbmError, RuntimeError):
    """A quadrature-backed evaluation failed to converge."""


class NotPSD(GfbmError, RuntimeError):
    """A matrix could not be factorized even after jitter escalation."""


class GridTooCoarse(GfbmError, ValueError):
    """The sample grid is too coarse for the requested statistic."""


class InsufficientData(GfbmError, ValueError):
    """Too few usable data points for a fit."""
