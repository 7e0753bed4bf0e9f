class TvgcError(Exception):
    """Base class for all errors raised by this package."""


class DataError(TvgcError, ValueError):
    """Input data failed validation (bad file, bad dates, out-of-range values)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EstimationError(TvgcError, ArithmeticError):
    """A regression or Wald computation could not be carried out reliably.

    ``condition`` carries the equilibrated condition number when the failure
    comes from the conditioning guard.
    """

    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class BootstrapError(TvgcError):
    """Too many bootstrap replications had to be discarded."""
