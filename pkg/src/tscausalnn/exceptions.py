"""Exception hierarchy.

Every error raised by the library derives from :class:`TSCausalError` so the
CLI can catch one type and report the failing stage.
"""


class TSCausalError(Exception):
    """Base class for all library errors."""

    stage = "tscausalnn"


class DimensionError(TSCausalError, ValueError):
    stage = "numerics"


class SpecError(TSCausalError, ValueError):
    stage = "datagen"


class ConvergenceError(TSCausalError, RuntimeError):
    stage = "datagen"


class NoiseRecordError(TSCausalError, RuntimeError):
    stage = "datagen"


class IngestionError(TSCausalError, ValueError):
    """Raised when a CSV cannot be turned into a dataset.

    ``row`` and ``col`` are 1-based data coordinates (header excluded) when
    the problem can be pinned to a cell.
    """

    stage = "ingest"

    def __init__(self, message, row=None, col=None):
        if row is not None:
            where = f"row {row}" if col is None else f"row {row}, column {col}"
            message = f"{message} ({where})"
        super().__init__(message)
        self.row = row
        self.col = col


class InsufficientDataError(TSCausalError, ValueError):
    stage = "preprocess"


class DivergenceError(TSCausalError, FloatingPointError):
    """Training produced a non-finite objective.

    ``last_state`` carries the most recent state whose objective was finite.
    """

    stage = "train"

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class GraphParseError(TSCausalError, ValueError):
    stage = "graphio"


class UsageError(TSCausalError, ValueError):
    stage = "usage"
