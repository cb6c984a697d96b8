"""Exception hierarchy shared across the package."""


class ResilientVoronoiError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ResilientVoronoiError, ValueError):
    """Input is well-formed but violates a mathematical precondition."""


class InvalidVertex(ResilientVoronoiError, IndexError):
    pass


class FormatError(ResilientVoronoiError, ValueError):
    """A text file could not be parsed.

    ``line`` is the 1-based line number of the offending record, or ``None``
    when the problem is not tied to one line.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
