"""Exception hierarchy.

Validation problems (bad input, bad arguments, bad config) map to CLI exit
code 2; numerical failures (rank deficiency, unusable estimates) map to 3.
"""


class WavedmdError(Exception):
    exit_code = 1


class ValidationError(WavedmdError, ValueError):
    exit_code = 2


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderingError(ValidationError):
    pass


class LevelError(ValidationError):
    pass


class StructureError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class NumericalError(WavedmdError, ArithmeticError):
    exit_code = 3


class RankError(NumericalError):
    pass


class EstimationError(NumericalError):
    pass


class StageError(WavedmdError):
    """Wraps a failure raised while running one pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"stage '{stage}' failed: {cause}")
