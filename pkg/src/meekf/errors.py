"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid argument, configuration or input data."""


class NumericalError(ArithmeticError):
    """A factorization or linear solve failed (non-PD or singular matrix)."""


class DiagnosticError(NumericalError):
    """A convergence diagnostic cannot be evaluated for the given instance."""
