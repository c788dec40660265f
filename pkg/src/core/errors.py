class SubmodError(Exception):
    """Base class for every error raised by this package."""


class InstanceSizeError(SubmodError, ValueError):
    """An exhaustive routine was asked to run above its size limit."""

    def __init__(self, operation: str, n: int, limit: int):
        self.operation = operation
        self.n = n
        self.limit = limit
        super().__init__(f"{operation} supports n <= {limit}, got n = {n}")


class InvalidPointError(SubmodError, ValueError):
    """A vector is not a point of [0,1]^N of the right dimension."""


class UnknownKindError(SubmodError, ValueError):
    """An instance, constraint or algorithm tag is not supported."""


class ConfigError(SubmodError):
    """A configuration or instance file could not be parsed or validated."""

    def __init__(self, message: str, path: str = None, line: int = None, column: int = None):
        self.path = path
        self.line = line
        self.column = column
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
                if column is not None:
                    location += f":{column}"
            location += ": "
        super().__init__(f"{location}{message}")


class VerificationError(SubmodError):
    """Raised when a caller asks for a hard failure on a failed verdict."""


class InfeasibleProblemError(SubmodError, ValueError):
    """No element of the ground set can be selected under the constraint."""
