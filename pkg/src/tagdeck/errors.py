"""Exception hierarchy shared across the engine."""


class TagdeckError(Exception):
    """Base class for all engine errors."""

    code = "error"


class NotFoundError(TagdeckError):
    """A referenced entity (tag, board, deck, job) does not exist."""

    code = "notFound"


class ConflictError(TagdeckError):
    """Optimistic-concurrency revision mismatch."""

    code = "conflict"


class BadInputError(TagdeckError):
    """Caller-supplied data violates a precondition."""

    code = "badInput"


class BackendError(TagdeckError):
    """Transport or auth failure talking to a completion backend."""

    code = "backendFailure"


class MalformedReplyError(BackendError):
    """Model output could not be parsed, retries exhausted."""

    code = "backendFailure"

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class ReplayMissError(BackendError):
    """Replay store has no entry for the request hash."""

    code = "backendFailure"

    def __init__(self, request_hash: str):
        super().__init__(f"no recorded response for request hash {request_hash}")
        self.request_hash = request_hash


class CapabilityError(TagdeckError):
    """A required optional capability (e.g. rasterizer) is unavailable."""

    code = "capability"


class ImportFormatError(BadInputError):
    """Uploaded bytes are not in a supported format."""

    code = "badInput"
