"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates an operation's precondition."""


class InvalidConfigError(ValueError):
    """A configuration object is internally inconsistent."""


class UnsupportedOperationError(RuntimeError):
    """The operation is not defined for the given parameters."""


class EnvironmentExhaustedError(RuntimeError):
    """The environment ran out of steps before the horizon."""


class TraceParseError(ValueError):
    """A trace file is malformed.  Carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
