class LeakscopeError(Exception):
    """Base class for validation errors raised by any stage.

    The CLI maps these to exit code 1; plain ``OSError`` maps to exit code 2.
    """


class SchemaError(LeakscopeError):
    """A data file entry violates the file schema; ``line`` is 1-based."""

    def __init__(self, line: int, message: str = ""):
        self.line = line
        super().__init__(f"line {line}: {message}" if message else f"line {line}")
