"""Exception hierarchy.

Everything raised on purpose by the package derives from
:class:`HypertoricError`; the CLI maps these to exit status 2.
"""


class HypertoricError(Exception):
    """Base class for all package errors."""


class SchemaError(HypertoricError, ValueError):
    """Malformed configuration, problem or points data."""


class ArityError(HypertoricError, ValueError):
    pass


class ZeroVectorError(HypertoricError, ValueError):
    """Primitivity asked of the zero vector."""


class NoUnimodularSubsetError(HypertoricError, ValueError):
    pass


class OrderingError(HypertoricError, RuntimeError):
    """An operation was called before its prerequisite step."""


class PreconditionError(HypertoricError, ValueError):
    pass


class DomainError(HypertoricError, ValueError):
    pass


class CoordinateSingularity(HypertoricError, ArithmeticError):
    """Evaluation point lies on a flat (or on a string locus)."""

    def __init__(self, message, flat=None):
        super().__init__(message)
        self.flat = flat


class NoCertifiedTail(HypertoricError, ArithmeticError):
    pass


class NonCoerciveError(HypertoricError, ArithmeticError):
    """Moment problem has an unbounded direction."""

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class ConvergenceError(HypertoricError, ArithmeticError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
