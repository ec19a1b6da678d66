"""Exception hierarchy shared by every querylab module."""


class QueryLabError(Exception):
    """Base class for all querylab errors."""


class InvalidMatrix(QueryLabError, ValueError):
    pass


class UndefinedGap(QueryLabError, ValueError):
    pass


class NotPositiveDefinite(QueryLabError, ValueError):
    pass


class InvalidBudget(QueryLabError, ValueError):
    pass


class BudgetExceeded(QueryLabError, RuntimeError):
    pass


class DimensionError(QueryLabError, ValueError):
    pass


class DependentVector(QueryLabError, ValueError):
    """Raised by Gram-Schmidt; ``index`` names the offending input vector."""

    def __init__(self, index, residual):
        super().__init__(f"vector {index} is dependent (residual norm {residual:.3e})")
        self.index = index
        self.residual = residual


class DomainError(QueryLabError, ValueError):
    pass


class EmbedError(QueryLabError, ValueError):
    pass


class CalibrationError(QueryLabError, RuntimeError):
    pass


class NumericalBreakdown(QueryLabError, ArithmeticError):
    pass


class InnerSolveFailed(QueryLabError, RuntimeError):
    def __init__(self, round_index, message="inner linear solve failed"):
        super().__init__(f"{message} (round {round_index})")
        self.round_index = round_index


class DegenerateSpan(QueryLabError, ValueError):
    pass


class SingularBlock(QueryLabError, ValueError):
    pass


class ConfigError(QueryLabError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
