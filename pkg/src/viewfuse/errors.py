"""Exception types shared across the package.

The CLI maps these onto its exit codes; library callers can catch the
base class.
"""


class ViewfuseError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ViewfuseError):
    """A view file could not be parsed."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class EmptyViewError(ViewfuseError):
    """A loaded view retained no usable data."""


class EmptyIntersectionError(ViewfuseError):
    """The views share no software units."""


class InsufficientDataError(ViewfuseError):
    """Not enough data for the requested evaluation protocol."""


class EmptyQueryError(ViewfuseError):
    """A search query has no terms left after preprocessing."""
