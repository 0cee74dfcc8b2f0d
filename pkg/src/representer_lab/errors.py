"""Exception and warning types shared across the toolkit."""


class RepresenterLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpace(RepresenterLabError, ValueError):
    pass


class IndexOutOfRange(RepresenterLabError, IndexError):
    pass


class InvalidTailRule(RepresenterLabError, ValueError):
    pass


class ZeroVector(RepresenterLabError, ValueError):
    pass


class ZeroFunctional(RepresenterLabError, ValueError):
    pass


class Infeasible(RepresenterLabError):
    """The interpolation constraints cannot be satisfied."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BudgetExceeded(RepresenterLabError):
    """The requested accuracy was not reached before the truncation cap.

    ``best`` holds the best :class:`~representer_lab.solvers.SolveResult`
    found so far, so callers can still report the achieved gap.
    """

    def __init__(self, message, n_max=None, best=None):
        super().__init__(message)
        self.n_max = n_max
        self.best = best


class NonRadialRegularizer(RepresenterLabError, ValueError):
    pass


class EkelandCheckFailed(RepresenterLabError):
    """A sampled Ekeland condition was violated; ``witness`` is re-checkable."""

    def __init__(self, message, witness=None, report=None):
        super().__init__(message)
        self.witness = witness
        self.report = report


class NormInflation(RepresenterLabError):
    pass


class SolverDiverged(RepresenterLabError):
    pass


class SchemaError(RepresenterLabError, ValueError):
    """Problem file failed validation. ``line``/``column`` are 1-based when known."""

    def __init__(self, message, path=None, line=None, column=None):
        super().__init__(message)
        self.path = path
        self.line = line
        self.column = column

    def __str__(self):
        loc = ""
        if self.line is not None:
            loc = f" (line {self.line}, column {self.column})"
        where = f" at {self.path}" if self.path else ""
        return f"{self.args[0]}{where}{loc}"


class RankDeficientConstraints(UserWarning):
    pass


class GridTooCoarse(UserWarning):
    pass


class UnboundedBelowSuspected(UserWarning):
    pass
