"""Exception types shared across the analysis pipeline."""

from __future__ import annotations


class CommlatError(Exception):
    """Base class for all analysis errors."""


class ValidationError(CommlatError):
    """Bad user input: malformed files, infeasible requests, unknown ids.

    CLI maps this family to exit code 1; the service maps it to 4xx.
    """


class TraceFormatError(ValidationError):
    """Trace file violates the event schema.

    Carries the per-line error report so callers can show every offending
    line at once instead of failing on the first.
    """

    def __init__(self, message: str, line_errors: list[tuple[int, str]] | None = None):
        super().__init__(message)
        self.line_errors = line_errors or []


class UnknownRankError(ValidationError):
    """A rank referenced by the trace is missing from the node map."""

    def __init__(self, rank: int):
        super().__init__(f"rank {rank} has no node assignment")
        self.rank = rank


class CalibrationError(ValidationError):
    """Latency criteria cannot be built (e.g. a locality class has no samples)."""


class EmptyRegionError(ValidationError):
    """An operation that needs messages was given a region without any."""


class InfeasibleMappingError(ValidationError):
    """Requested node capacity cannot hold all processes."""


class InternalConsistencyError(CommlatError):
    """An invariant the pipeline guarantees was violated; indicates a bug."""
