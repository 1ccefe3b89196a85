"""Exception hierarchy shared by the library and the CLI."""


class CollectiveDecayError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CollectiveDecayError, ValueError):
    """Input outside the documented domain of an operation."""


class DegenerateGeometry(ValidationError):
    """Two atoms share the same position."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of a kernel (e.g. x <= 0)."""


class NumericalError(CollectiveDecayError, ArithmeticError):
    """A numerical procedure failed (eigen solver, step size, norm drift)."""


class ConvergenceError(NumericalError):
    """Quadrature extrapolation did not converge.

    Attributes:
        residual: the extrapolation residual that exceeded the tolerance.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class FitError(NumericalError):
    """Least-squares rate/shift extraction is not applicable to the data."""
