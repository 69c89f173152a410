"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: usage problems exit 1, data problems
exit 2, numerical failures exit 3.
"""


class NewsbaitError(Exception):
    """Base class for all package errors."""


class UsageError(NewsbaitError):
    """Bad command invocation or configuration values."""


class ConfigError(UsageError):
    """Inconsistent configuration, e.g. model/feature registry mismatch."""


class DataError(NewsbaitError):
    """Problems with input data or stored state."""


class StoreError(DataError):
    """Rejected batch, constraint violation, or storage I/O failure."""


class EmptyStoreError(StoreError):
    """Operation requires a non-empty score store."""


class CsvFormatError(DataError):
    """Malformed CSV interchange file; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DesignError(DataError):
    """Event outside the series range or too few observations per side."""


class TrainingError(DataError):
    """Unusable training corpus (e.g. a single class)."""


class NumericalError(NewsbaitError):
    """Numerical failure in a statistical routine."""


class DegenerateSeriesError(NumericalError):
    """Series has zero variance or is otherwise unusable."""


class RankDeficiencyError(NumericalError):
    """Design matrix is rank deficient; names the collinear columns."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"design matrix is rank deficient in columns: {', '.join(self.columns)}")


class NonStationaryError(NumericalError):
    """AR coefficients describe a non-stationary process."""


class ConvergenceError(NumericalError):
    """Optimizer exhausted its budget; carries the best fit found so far."""

    def __init__(self, message: str, best_fit=None, grad_norm: float | None = None):
        super().__init__(message)
        self.best_fit = best_fit
        self.grad_norm = grad_norm
