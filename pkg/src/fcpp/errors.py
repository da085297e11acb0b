"""Exception types raised across the package."""


class FcppError(Exception):
    """Base class for all package errors."""


class DomainError(FcppError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateSampleError(FcppError, ValueError):
    """The sample carries no information for the requested estimate."""


class InsufficientDataError(FcppError, ValueError):
    """Too few exceedances or inter-exceedance times."""


class OptimizationError(FcppError, RuntimeError):
    """No optimizer start converged."""


class ParseError(FcppError, ValueError):
    """Malformed input file."""
