"""Error hierarchy shared by all modules; each class maps to a CLI exit code."""


class PlanevalError(Exception):
    exit_code = 1


class ParseError(PlanevalError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class ValidationError(PlanevalError):
    exit_code = 3


class UnsupportedClassError(ValidationError):
    pass


class DomainError(PlanevalError):
    exit_code = 4


class CapabilityError(PlanevalError):
    exit_code = 5
