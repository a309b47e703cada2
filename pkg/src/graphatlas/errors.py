"""Exception types shared across the package."""

from __future__ import annotations


class GraphAtlasError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(GraphAtlasError):
    """Malformed input during ingestion. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EncodingError(GraphAtlasError):
    """Input is not valid UTF-8. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidParameterError(GraphAtlasError, ValueError):
    """A caller-supplied parameter is out of range or inconsistent."""

    def __init__(self, message: str, param: str | None = None):
        super().__init__(message)
        self.param = param


class ContractViolation(GraphAtlasError):
    """Internal data handed between stages failed a consistency check."""


class StoreError(GraphAtlasError):
    """Base class for persisted-store problems."""


class StoreCorruptError(StoreError):
    """A store section failed its checksum or structural validation.

    ``section`` names the offending section in human terms
    (for example "node table").
    """

    def __init__(self, message: str, section: str):
        super().__init__(f"{section}: {message}")
        self.section = section


class StoreIOError(StoreError):
    """An OS-level read or write failed. Names the section involved."""

    def __init__(self, message: str, section: str):
        super().__init__(f"{section}: {message}")
        self.section = section


class StoreVersionError(StoreError):
    """The store's format version is not one this code can read."""
