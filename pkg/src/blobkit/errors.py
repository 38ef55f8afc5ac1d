"""Shared exception types.

The HTTP layer maps these onto status codes (parse -> 400, not-found -> 404,
revision conflict -> 409, invariant violations -> 422), so modules below the
service must raise these rather than bare ValueError where the distinction
matters.
"""

from __future__ import annotations


class BlobkitError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(BlobkitError, ValueError):
    """An argument violates a documented precondition or invariant."""


class DegenerateInputError(BlobkitError, ValueError):
    """Input is structurally valid but carries no usable signal.

    Examples: IOU of two empty masks, fitting a mask with fewer than five
    foreground pixels, collinear foreground pixels.
    """


class ParseError(BlobkitError, ValueError):
    """Text or JSON input could not be parsed at all.

    ``rejects`` carries per-line failure records when line-oriented input
    produced zero usable lines; ``path`` names the offending JSON field.
    """

    def __init__(self, message: str, *, rejects=None, path: str | None = None):
        super().__init__(message)
        self.rejects = tuple(rejects) if rejects else ()
        self.path = path


class NotFoundError(BlobkitError, KeyError):
    """No stored record under the given id."""


class StaleRevisionError(BlobkitError):
    """A mutation carried a revision older than the stored one."""

    def __init__(self, message: str, *, expected: int, got: int):
        super().__init__(message)
        self.expected = expected
        self.got = got
