"""Exception hierarchy shared across the package."""


class StockcastError(Exception):
    """Base class for all package errors."""


class ShapeError(StockcastError, ValueError):
    """Dimensions of inputs do not match the network or table."""


class NumericError(StockcastError, ArithmeticError):
    """A non-finite value appeared during training."""


class TrainingDivergedError(NumericError):
    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}; lower the learning rate")


class TrainingFailedError(StockcastError):
    """Every repetition of a best-of-N run diverged."""


class ModelParseError(StockcastError, ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DataError(StockcastError, ValueError):
    """Base for price-file problems."""


class SchemaError(DataError):
    pass


class IntegrityError(DataError):
    pass


class RowParseError(DataError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class EmptyInputError(DataError):
    pass


class DegenerateRangeError(DataError):
    pass


class ConfigurationError(StockcastError, ValueError):
    pass


class InsufficientCalendarError(StockcastError):
    pass


class CoverageError(StockcastError):
    """Not enough price history precedes a date that must be predicted."""


class MetricError(StockcastError, ValueError):
    """Metric undefined for the given inputs (e.g. zero actual price)."""
