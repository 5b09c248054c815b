"""Error taxonomy shared by all simspark modules.

Each error carries a stable machine-readable ``code`` so the CLI and the
HTTP layer can surface failures without string matching.
"""

from __future__ import annotations


class SimsparkError(Exception):
    """Base class; ``code`` is stable across versions."""

    code = "SIMSPARK_ERROR"

    def __init__(self, message: str, *, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def to_json(self) -> dict:
        return {"code": self.code, "message": str(self)}


class PreconditionError(SimsparkError):
    code = "PRECONDITION_FAILED"


class StateError(SimsparkError):
    """Illegal run-state transition or mutation attempted while Running."""

    code = "STATE_ERROR"


class StateLockedError(StateError):
    code = "STATE_LOCKED"


class TimePastError(SimsparkError):
    code = "TIME_PAST_ERROR"


class MalformedPayload(SimsparkError):
    """Model output could not be coerced into the expected shape."""

    code = "MALFORMED_PAYLOAD"


class TemplateError(SimsparkError):
    code = "TEMPLATE_ERROR"


class ProviderUnavailable(SimsparkError):
    code = "PROVIDER_UNAVAILABLE"


class ProviderContractViolation(SimsparkError):
    code = "PROVIDER_CONTRACT_VIOLATION"


class ComputeError(SimsparkError):
    code = "COMPUTE_ERROR"


class NotFoundError(SimsparkError):
    code = "NOT_FOUND"


class FilterError(SimsparkError):
    """Malformed or out-of-range query filter."""

    code = "FILTER_INVALID"


class ParseError(SimsparkError):
    """Config document violates the schema; ``path`` names the bad field."""

    code = "PARSE_ERROR"

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path
