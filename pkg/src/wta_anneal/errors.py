"""Exception types shared across the package."""


class WtaAnnealError(Exception):
    """Base class for all package errors."""


class ValidationError(WtaAnnealError, ValueError):
    """Raised when inputs violate a documented precondition."""


class ParseError(ValidationError):
    """Raised when a serialized document is malformed; message names the field path."""


class SizeLimitError(WtaAnnealError, ValueError):
    """Raised when a problem exceeds an enumeration or simulation ceiling."""


class IntegrationError(WtaAnnealError, RuntimeError):
    """Raised when the time integrator loses accuracy (norm drift over tolerance)."""


class EigensolverError(WtaAnnealError, RuntimeError):
    """Raised when a spectrum computation fails to converge at some sample time."""
