"""Exception hierarchy shared across the engine."""

from __future__ import annotations

__all__ = [
    "RecovsliceError",
    "SchemaViolation",
    "DanglingReference",
    "NonMonotonicSteps",
    "PathSyntaxError",
    "RootMismatch",
    "MiniSyntaxError",
    "MiniRuntimeFault",
    "StepBudgetExceeded",
    "UnresolvablePath",
    "UnknownStep",
    "EstimatorError",
    "RecoveryFailed",
    "BackendUnavailable",
    "NoJsonBlock",
    "MalformedGraph",
    "NoVerdict",
    "TransportError",
    "CacheMissInOfflineMode",
    "UnsupportedShape",
    "ProbeFault",
]


class RecovsliceError(Exception):
    """Base class for every error raised by this package."""


# --- trace model -----------------------------------------------------------

class SchemaViolation(RecovsliceError):
    """A trace document does not match the trace JSON schema."""


class DanglingReference(SchemaViolation):
    """A step or child edge references a var_id missing from the table."""


class NonMonotonicSteps(SchemaViolation):
    """Step ids are not strictly increasing along the trace."""


# --- access paths ----------------------------------------------------------

class PathSyntaxError(RecovsliceError):
    """Malformed access path; carries the byte offset and expectations."""

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.expected = tuple(expected)


class RootMismatch(RecovsliceError):
    """A path was resolved against a graph rooted at a different name."""


# --- MiniLang --------------------------------------------------------------

class MiniSyntaxError(RecovsliceError):
    """MiniLang source failed to parse; carries file and line."""

    def __init__(self, message, file_id="?", line=0):
        super().__init__(f"{file_id}:{line}: {message}")
        self.file_id = file_id
        self.line = line


class MiniRuntimeFault(RecovsliceError):
    """MiniLang program faulted at run time (bad field, type error, ...)."""


class StepBudgetExceeded(MiniRuntimeFault):
    """Execution exceeded the configured step budget."""


class UnresolvablePath(RecovsliceError):
    """An access path does not name a live value at the query step."""


class UnknownStep(RecovsliceError):
    """A query referenced a step id that is not in the trace."""


# --- estimators ------------------------------------------------------------

class EstimatorError(RecovsliceError):
    """Base class for execution-estimator failures."""


class RecoveryFailed(EstimatorError):
    """Object graph recovery gave up after repair and retries."""


class BackendUnavailable(EstimatorError):
    """The estimator backend cannot answer (offline, no transport, ...)."""


# --- LLM backend -----------------------------------------------------------

class NoJsonBlock(RecovsliceError):
    """A completion contained no parsable JSON payload."""


class MalformedGraph(RecovsliceError):
    """A recovery completion violated the graph wire format."""


class NoVerdict(RecovsliceError):
    """A definition completion contained neither <T> nor <F>."""


class TransportError(RecovsliceError):
    """The completion endpoint kept failing after retries."""


class CacheMissInOfflineMode(RecovsliceError):
    """Cache-only completion requested a prompt that was never recorded."""


# --- adaptive context ------------------------------------------------------

class UnsupportedShape(RecovsliceError):
    """No probe template fits the recorded value shape."""


class ProbeFault(RecovsliceError):
    """A synthesized probe program faulted while being traced."""
