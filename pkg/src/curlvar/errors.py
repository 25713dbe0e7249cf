"""Exception hierarchy for curlvar."""


class CurlvarError(Exception):
    """Base class for all curlvar errors."""


class InvalidFieldError(CurlvarError):
    """Field arrays are inconsistent with their grid or violate a structural invariant."""


class DomainError(CurlvarError):
    """A scalar argument is outside its mathematical domain (e.g. p < 1, s <= 0)."""


class ContractViolation(CurlvarError):
    """An input breaks a documented precondition (nonzero trace, non-curl-free w, ...)."""


class DegenerateInputError(CurlvarError):
    """The input lies in (or numerically touches) the excluded degenerate set."""


class SolverNonConvergence(CurlvarError):
    """An iterative solver hit its budget before reaching tolerance.

    Carries the final residual so callers can decide whether to flag or abort.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SpectrumUnderResolved(CurlvarError):
    """The computed eigenvalue ladder does not reach past the requested cut."""


class ConfigError(CurlvarError):
    """Configuration file is malformed or fails validation."""
