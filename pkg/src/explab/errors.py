"""Exception types shared across the package."""


class ExplabError(Exception):
    """Base class for errors raised by explab."""


class NumericError(ExplabError):
    """A computation produced or received non-finite values."""


class ParseError(ExplabError):
    """A data file could not be parsed.

    Carries the offending path and 1-based line number when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)
