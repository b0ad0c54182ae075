"""Exception taxonomy shared by all clausepipe modules."""

from __future__ import annotations


class ClausePipeError(Exception):
    """Base class for every error raised by this package."""


# --- corpus parsing / splitting ---

class CorpusError(ClausePipeError):
    pass


class UnbalancedDelimiter(CorpusError):
    """A clause or class delimiter was opened without a matching close (or nested)."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class InvalidLabel(CorpusError):
    """A class payload token is not an integer in 1..14."""

    def __init__(self, token: str, offset: int | None = None):
        where = f" at byte offset {offset}" if offset is not None else ""
        super().__init__(f"invalid label token {token!r}{where}")
        self.token = token
        self.offset = offset


class EmptyClauseText(CorpusError):
    """A clause block contains no text once class tags and whitespace are removed."""

    def __init__(self, block_index: int):
        super().__init__(f"clause block {block_index} has empty text")
        self.block_index = block_index


class EmptyCorpus(CorpusError):
    pass


# --- metrics ---

class MetricsError(ClausePipeError):
    pass


class ShapeMismatch(MetricsError):
    pass


class ZeroSupport(MetricsError):
    pass


class TooFewSamples(MetricsError):
    pass


# --- model backends ---

class BackendFailure(ClausePipeError):
    """Base class for anything that goes wrong talking to a model backend."""


class Timeout(BackendFailure):
    pass


class TransportError(BackendFailure):
    pass


class BackendError(BackendFailure):
    """Non-2xx response from a backend, body attached."""

    def __init__(self, status: int, body: str):
        super().__init__(f"backend returned HTTP {status}: {body[:200]}")
        self.status = status
        self.body = body


class RetriesExhausted(BackendFailure):
    def __init__(self, request_id: str, attempts: int, cause: Exception):
        super().__init__(
            f"request {request_id} failed after {attempts} attempts: {cause}"
        )
        self.request_id = request_id
        self.attempts = attempts
        self.cause = cause


class ProtocolError(BackendFailure):
    """The backend answered, but not in the agreed format."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


# --- semantic evaluation ---

class DegenerateEmbedding(ClausePipeError):
    """An embedding came back with zero norm; cosine similarity is undefined."""


# --- pipeline ---

class PipelineError(ClausePipeError):
    pass


class SegmentationEmpty(PipelineError):
    """The segmenter produced output with no parseable clause blocks."""


class ClassificationError(PipelineError):
    """A backend/protocol failure while classifying, annotated with the clause index."""

    def __init__(self, clause_index: int, cause: Exception):
        super().__init__(f"clause {clause_index}: {cause}")
        self.clause_index = clause_index
        self.cause = cause


class ConfigError(ClausePipeError):
    pass
