"""Exception hierarchy shared by every chunkforge module.

Each error carries an ``exit_code`` used by the CLI (2 = I/O or parse
problems, 1 = metric/key problems) and serializes to the machine-readable
error JSON emitted on stdout / in HTTP error responses.
"""

from __future__ import annotations

from typing import Any


class ChunkforgeError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_json(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "type": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
        }
        if self.details:
            payload["details"] = self.details
        return payload


# --- ingest ---------------------------------------------------------------

class MalformedLine(ChunkforgeError):
    """Annotation line with fewer than 9 fields or a non-integer coordinate."""


class MissingFile(ChunkforgeError):
    pass


class UnreadableImage(ChunkforgeError):
    pass


class EmptyAnnotation(ChunkforgeError):
    """Annotation file yielded zero valid text instances."""


class EmptyDataset(ChunkforgeError):
    pass


# --- sampler / dataset build ----------------------------------------------

class PageTooShort(ChunkforgeError):
    """Page height is smaller than the requested chunk count."""


class SeparatorCollision(ChunkforgeError):
    """The line-separator character occurs inside a transcript."""


class InvalidStageSpec(ChunkforgeError):
    """Curriculum stage list is empty or not strictly decreasing."""


class IoError(ChunkforgeError):
    pass


# --- metrics / evaluation (exit code 1) -------------------------------------

class EmptyReference(ChunkforgeError):
    """CER is undefined for an empty reference string."""

    exit_code = 1


class EmptyCorpus(ChunkforgeError):
    exit_code = 1


class KeyMismatch(ChunkforgeError):
    """Reference and hypothesis files do not cover the same key set."""

    exit_code = 1
