"""Shared exception types."""


class ClinprojError(Exception):
    """Base class for errors raised by this package."""


class RejectedInput(ClinprojError, ValueError):
    """Input violates a documented precondition or format constraint."""


class CodecError(ClinprojError, ValueError):
    """A serialized document could not be parsed.

    ``line``/``column`` are set for XML parse failures, ``path`` for JSON
    schema violations (e.g. ``$.annotations[2].begin``).
    """

    def __init__(self, message: str, *, line: int | None = None,
                 column: int | None = None, path: str | None = None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.path = path


class LexiconError(ClinprojError, ValueError):
    """A WordNet database file is missing or corrupt."""


class ConfigError(ClinprojError, ValueError):
    """Invalid configuration or fixture file."""


class TransportError(ClinprojError, RuntimeError):
    """Transient transport failure (after retries were exhausted)."""


class ProviderError(ClinprojError, RuntimeError):
    """The backend refused the request; carries the provider payload."""

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


class ProjectionError(ClinprojError, RuntimeError):
    """The projection pipeline produced an internally inconsistent result."""


class JournalError(ClinprojError, ValueError):
    """The review journal is unreadable or contains a malformed line."""


class UnknownAnnotation(ClinprojError, KeyError):
    """A decision referenced an annotation that does not exist."""


class InvalidDecision(ClinprojError, ValueError):
    """A decision is not applicable to the referenced annotation."""
