"""Exception types raised across the package."""


class SemmapError(Exception):
    """Base class for all package errors."""


class EmptyInputError(SemmapError, ValueError):
    pass


class OutOfRangeError(SemmapError, ValueError):
    pass


class DegenerateModelError(SemmapError, ValueError):
    pass


class DimensionError(SemmapError, ValueError):
    pass


class ValidationError(SemmapError, ValueError):
    pass


class FormatError(SemmapError):
    """Malformed input file. Carries the path and, where known, a line or byte offset."""

    def __init__(self, path, message, line=None, offset=None):
        self.path = str(path)
        self.line = line
        self.offset = offset
        where = self.path
        if line is not None:
            where += f":{line}"
        elif offset is not None:
            where += f"@{offset}"
        super().__init__(f"{where}: {message}")
