"""Shared exception types.

Everything raised on purpose derives from KgFuseError so callers can
catch the package's failures with one except clause.  Where a builtin
category fits (bad value, missing key) the subclass inherits it too.
"""

from __future__ import annotations


class KgFuseError(Exception):
    """Base class for all errors raised by this package."""


class TypeConflictError(KgFuseError, ValueError):
    """Same node id asserted with two different node types."""


class ReferentialIntegrityError(KgFuseError, ValueError):
    """A triple references a node id that does not resolve."""


class UnknownNodeError(KgFuseError, KeyError):
    """Lookup of a node id that is not in the graph."""


class ParseError(KgFuseError, ValueError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        where = []
        if path is not None:
            where.append(path)
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.path = path


class EmbeddingError(KgFuseError, ValueError):
    """Bad embedding input: empty text, zero vector, dimension mismatch."""


class RemoteEmbeddingError(KgFuseError, RuntimeError):
    """Remote embedding endpoint failed or returned a malformed payload."""


class CandidateError(KgFuseError, KeyError):
    """Unknown candidate id."""


class TerminalStatusError(KgFuseError, ValueError):
    """Feedback submitted for a candidate whose status is terminal."""


class VersionConflictError(KgFuseError, RuntimeError):
    """Optimistic-concurrency check failed: submitted version is stale."""

    def __init__(self, submitted: int, current: int):
        super().__init__(f"stale version {submitted}, session is at {current}")
        self.submitted = submitted
        self.current = current


class ConfigError(KgFuseError, ValueError):
    """Invalid or unreadable run configuration."""


class TrainingError(KgFuseError, RuntimeError):
    """Training diverged (non-finite loss) or was misconfigured."""
