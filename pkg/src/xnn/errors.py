"""Exception types shared across the package."""


class XnnError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(XnnError, ValueError):
    """A config, model, or dataset violates a structural contract."""


class ModelParseError(XnnError, ValueError):
    """A model file could not be parsed.

    ``field`` names the first offending field encountered.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"field '{field}': {message}")
        self.field = field


class NumericDivergenceError(XnnError, ArithmeticError):
    """A computation produced a non-finite parameter or gradient."""

    def __init__(self, message: str, epoch: int | None = None, batch: int | None = None):
        if epoch is not None:
            message = f"{message} (epoch {epoch}, batch {batch})"
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
