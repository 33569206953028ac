"""Exception hierarchy.

Every error raised by the package derives from :class:`TickerlabError`, and
each family maps to one CLI exit code (data 1, config 2, divergence 3).
"""


class TickerlabError(Exception):
    exit_code = 1


class DataError(TickerlabError, ValueError):
    exit_code = 1


class ConfigError(TickerlabError, ValueError):
    exit_code = 2


class TrainingDivergence(TickerlabError, ArithmeticError):
    exit_code = 3


class _LineError(DataError):
    def __init__(self, line, message=""):
        self.line = line
        super().__init__(f"line {line}: {message}" if message else f"line {line}")


# -- market data ---------------------------------------------------------------

class MissingColumn(DataError):
    pass


class MalformedRow(_LineError):
    pass


class NonMonotonicDates(_LineError):
    pass


class NonPositivePrice(_LineError):
    pass


class NetworkUnavailable(DataError):
    pass


class SymbolNotFound(DataError):
    pass


class EmptyRange(DataError):
    pass


class MalformedResponse(DataError):
    pass


# -- preprocessing -------------------------------------------------------------

class DegenerateRange(DataError):
    pass


class TooShort(DataError):
    pass


class EmptyPartition(DataError):
    pass


# -- kalman --------------------------------------------------------------------

class InsufficientHistory(DataError):
    pass


# -- neural engine / models ----------------------------------------------------

class ShapeMismatch(TickerlabError, ValueError):
    pass


class NonFiniteActivation(TickerlabError, ArithmeticError):
    pass


class CacheMismatch(TickerlabError, ValueError):
    pass


class WindowTooSmall(ShapeMismatch):
    pass


class InvalidSpec(ConfigError):
    pass


class NonFiniteLoss(TrainingDivergence):
    def __init__(self, epoch, message=""):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


class InsufficientContext(DataError):
    pass


class UnsupportedVersion(DataError):
    pass


class CorruptFile(DataError):
    pass


class IoFailure(TickerlabError, OSError):
    exit_code = 1


# -- metrics / experiments -----------------------------------------------------

class LengthMismatch(DataError):
    pass


class Empty(DataError):
    pass


class ConstantActuals(DataError):
    pass


class AlignmentError(DataError):
    pass


class ExperimentError(TickerlabError):
    """Wraps a failure with the (symbol, algorithm) cell that produced it."""

    def __init__(self, symbol, algorithm, cause):
        self.symbol = symbol
        self.algorithm = algorithm
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"[{symbol} / {algorithm}] {cause}")
