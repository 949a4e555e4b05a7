"""Exception types raised across the lab."""


class SparseLabError(Exception):
    """Base class for all errors raised by sparselab."""


class InfeasibleParams(SparseLabError, ValueError):
    """Design parameters violate their invariants (e.g. indefinite support Gram)."""


class RejectionBudgetExhausted(SparseLabError, RuntimeError):
    """A filler column could not satisfy the between-group coherence bound."""


class SingularSupportGram(SparseLabError, ArithmeticError):
    """The support Gram matrix is numerically singular."""


class SingularLeastSquares(SparseLabError, ArithmeticError):
    """A least-squares refit hit numerically dependent columns."""


class BudgetExceeded(SparseLabError, ValueError):
    """Exhaustive enumeration would exceed the subset budget."""


class EmptyCell(SparseLabError, ValueError):
    """Aggregation was asked to summarize a cell with no trials."""
