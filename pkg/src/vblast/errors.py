"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An argument violates a documented precondition (shape, range, NaN)."""


class SingularMatrixError(ArithmeticError):
    """A pivot or denominator is too small to divide by safely."""
