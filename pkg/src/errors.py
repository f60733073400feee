"""
Error hierarchy
Every error carries the exit code the command line reports for it
"""


class AsmaError(Exception):
    """Base class for all errors raised by this package"""

    exit_code = 1


class UsageError(AsmaError):
    """Invalid invocation or configuration"""

    exit_code = 1


class ConfigError(UsageError):
    pass


class RunDirectoryExists(UsageError):
    pass


class BatchTooSmall(UsageError):
    pass


class DataError(AsmaError):
    """Input data could not be read or is inconsistent"""

    exit_code = 2


class EmptyFile(DataError):
    pass


class MalformedRecord(DataError):
    def __init__(self, message: str, line: int = 0):
        if line:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonNumericField(MalformedRecord):
    pass


class CacheFormatError(DataError):
    pass


class DatasetEmpty(DataError):
    pass


class MissingParents(DataError):
    pass


class DegenerateGraph(DataError):
    pass


class LabelSpaceMismatch(DataError):
    pass


class CheckpointMismatch(DataError):
    pass


class CheckpointFormatError(DataError):
    pass


class NumericError(AsmaError):
    """Numerical failure during computation"""

    exit_code = 3


class ShapeMismatch(NumericError, ValueError):
    pass


class NonFiniteDetected(NumericError):
    pass


class NonFiniteLoss(NumericError):
    pass


class NotScalar(NumericError):
    pass


class NoTape(NumericError):
    pass


class ZeroVector(NumericError):
    pass
