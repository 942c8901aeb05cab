"""Exception types shared across the pipeline."""

from __future__ import annotations


class CorefError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(CorefError):
    """Malformed corpus input. Carries a document/line locus when known."""

    def __init__(self, message: str, *, doc_id: str | None = None, line: int | None = None):
        locus = []
        if doc_id is not None:
            locus.append(f"doc={doc_id}")
        if line is not None:
            locus.append(f"line={line}")
        if locus:
            message = f"{message} [{', '.join(locus)}]"
        super().__init__(message)
        self.doc_id = doc_id
        self.line = line


class UnknownMentionError(CorefError, KeyError):
    """A mention id was requested that the corpus/index does not contain."""


class DimensionMismatchError(CorefError, ValueError):
    """Vector dimensions disagree."""


class UnscoredPairError(CorefError):
    """A pair score was required but the scorer cannot produce one.

    Raised by external score tables when clustering asks for a cross-cluster
    pair that was never scored.
    """

    def __init__(self, a: str, b: str):
        super().__init__(f"unscored pair: ({a}, {b})")
        self.pair = (a, b)


class ConfigError(CorefError, ValueError):
    """Invalid configuration (bad field value, missing file, ...)."""


class StageError(CorefError):
    """A pipeline stage failed; message is prefixed with the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
