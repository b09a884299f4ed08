"""Exception hierarchy shared by all mtix modules.

Input-side failures (bad files, bad values) derive from MtixError and map to
CLI exit code 2; InvariantError signals an internal consistency failure and
maps to exit code 3.
"""


class MtixError(Exception):
    """Base class for all mtix errors."""


class ParseError(MtixError):
    """A text input line could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ValidationError(MtixError, ValueError):
    """An input value violates a documented precondition."""


class CorruptionError(MtixError):
    """Encoded data decodes to an impossible value."""


class TruncationError(CorruptionError):
    """An encoded stream ended in the middle of a value."""


class FormatError(MtixError):
    """An index file has a bad magic number or unsupported version."""


class InvariantError(MtixError):
    """An internal invariant was violated; indicates a bug, not bad input."""
