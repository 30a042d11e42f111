"""Exception types raised by the solver stack."""


class SylvNDError(Exception):
    """Base class for all package errors."""


class SingularOperator(SylvNDError, ZeroDivisionError):
    """The Sylvester operator has a (numerically) vanishing eigenvalue sum.

    Attributes
    ----------
    multi_index : tuple of int
        1-based multi-index at which the denominator vanished.
    denominator : complex
        Value of the offending denominator.
    """

    def __init__(self, multi_index, denominator, tol=None):
        self.multi_index = tuple(int(i) for i in multi_index)
        self.denominator = complex(denominator)
        self.tol = tol
        msg = (f"singular Sylvester operator at multi-index {self.multi_index}: "
               f"denominator {self.denominator!r}")
        if tol is not None:
            msg += f" (|den| <= tol={tol:.3e})"
        super().__init__(msg)


class ConvergenceError(SylvNDError, ArithmeticError):
    """An iterative kernel (QR iteration, Newton polish) ran out of budget."""


class MemoryBudgetExceeded(SylvNDError, MemoryError):
    """A requested problem would exceed the configured memory budget."""

    def __init__(self, required, budget):
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(f"projected memory {self.required} bytes exceeds "
                         f"budget of {self.budget} bytes")


class TensorFormatError(SylvNDError, ValueError):
    """A tensor file is malformed or inconsistent."""


class SingularMatrix(SylvNDError, ArithmeticError):
    """Dense elimination met a pivot below the singularity threshold."""
