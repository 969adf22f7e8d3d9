"""Shared exception types."""

from __future__ import annotations


class NegirError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(NegirError):
    """A record or line in an input file could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        location = ""
        if path is not None:
            location = f"{path}:" if line is None else f"{path}:{line}:"
        elif line is not None:
            location = f"line {line}:"
        super().__init__(f"{location} {message}".strip())
        self.path = path
        self.line = line


class DuplicateIdError(NegirError):
    """Two records in one collection carry the same identifier."""

    def __init__(self, kind: str, identifier: str):
        super().__init__(f"duplicate {kind}: {identifier!r}")
        self.identifier = identifier
