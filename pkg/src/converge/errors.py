"""Exception hierarchy for the converge engine.

Every error class carries a stable machine-readable code (used by the API
envelope and CLI structured output) and a process exit code.
"""
from __future__ import annotations


class ConvergeError(Exception):
    """Base class for all engine errors."""

    code = "ENGINE_ERROR"
    exit_code = 1

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class LocationOccupiedError(ConvergeError):
    code = "LOCATION_OCCUPIED"
    exit_code = 3


class MissingProjectError(ConvergeError):
    code = "MISSING_PROJECT"
    exit_code = 3


class CorruptStateError(ConvergeError):
    code = "CORRUPT_STATE_FILE"
    exit_code = 4


class IllegalEdgeError(ConvergeError):
    code = "ILLEGAL_EDGE"
    exit_code = 5


class GateVerdictMismatchError(ConvergeError):
    code = "GATE_VERDICT_MISMATCH"
    exit_code = 5


class ValidationError(ConvergeError):
    """Bad operation input: wrong arity, out-of-range award, etc."""

    code = "VALIDATION_ERROR"
    exit_code = 6


class FoundationNotConvergedError(ConvergeError):
    code = "FOUNDATION_NOT_CONVERGED"
    exit_code = 6


class DownwardRetroactionError(ConvergeError):
    code = "DOWNWARD_RETROACTION"
    exit_code = 6


class NonConsecutiveCycleError(ConvergeError):
    code = "NON_CONSECUTIVE_CYCLE"
    exit_code = 6


class UnknownModuleError(ConvergeError):
    code = "UNKNOWN_MODULE"
    exit_code = 6


class InactiveLensError(ConvergeError):
    code = "INACTIVE_LENS"
    exit_code = 6


class UnknownFindingError(ConvergeError):
    code = "UNKNOWN_FINDING"
    exit_code = 6


class IllegalDecisionError(ConvergeError):
    code = "ILLEGAL_DECISION"
    exit_code = 6


class MatrixIncompleteError(ConvergeError):
    code = "MATRIX_INCOMPLETE"
    exit_code = 7


class NonConsecutiveVersionsError(ConvergeError):
    code = "NON_CONSECUTIVE_VERSIONS"
    exit_code = 6


class VerdictSetMismatchError(ConvergeError):
    code = "VERDICT_SET_MISMATCH"
    exit_code = 6


class CommandNotFoundError(ConvergeError):
    code = "COMMAND_NOT_FOUND"
    exit_code = 8


class CommandTimeoutError(ConvergeError):
    code = "COMMAND_TIMEOUT"
    exit_code = 8


class AgentNotAutomaticError(ConvergeError):
    code = "AGENT_NOT_AUTOMATIC"
    exit_code = 6


class KindPhaseMismatchError(ConvergeError):
    code = "KIND_PHASE_MISMATCH"
    exit_code = 6
