"""Exception hierarchy shared across the package."""


class SRPriorError(Exception):
    """Base class for all errors raised by srprior."""


class DimensionError(SRPriorError, ValueError):
    """Array shapes are incompatible with the requested operation."""


class ConfigurationError(SRPriorError, ValueError):
    """A parameter or configuration value is invalid."""


class NumericError(SRPriorError, ValueError):
    """Input contains NaN or infinite values."""


class ConvergenceError(SRPriorError, RuntimeError):
    """An iterative routine hit its iteration cap.

    Attributes
    ----------
    residual : float
        Off-diagonal mass left when the routine gave up.
    """

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class FormatError(SRPriorError, ValueError):
    """A file does not follow the expected binary layout."""


class TrainingDivergedError(SRPriorError, RuntimeError):
    """Training produced a non-finite or runaway loss."""

    def __init__(self, epoch, message="training diverged"):
        super().__init__(f"{message} at epoch {epoch}")
        self.epoch = epoch
