"""Exception hierarchy shared by all perfadvisor modules.

Every error raised by the library derives from :class:`PerfAdvisorError`,
so callers can catch one type at the CLI/service boundary and map it to
an exit code or a structured error body.
"""

from __future__ import annotations

from typing import Optional


class PerfAdvisorError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# Profile parsing / ingestion
# ---------------------------------------------------------------------------

class ProfileSyntaxError(PerfAdvisorError):
    """The profile document is not syntactically valid.

    ``position`` is a human-readable locator: either ``line N column M``
    from the JSON decoder or a key path such as ``files['x.py'].lines[3]``.
    """

    def __init__(self, message: str, position: str = ""):
        self.position = position
        super().__init__(f"{message} (at {position})" if position else message)


class InvariantViolation(PerfAdvisorError):
    """A structurally valid document violates a documented invariant."""

    def __init__(self, invariant: str, detail: str = "", line: Optional[int] = None):
        self.invariant = invariant
        self.line = line
        msg = f"invariant violated: {invariant}"
        if line is not None:
            msg += f" (line {line})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class UnknownDialect(PerfAdvisorError):
    """No adapter is registered under the requested dialect name."""


class MalformedInput(PerfAdvisorError):
    """External profiler output could not be understood by its adapter."""


# ---------------------------------------------------------------------------
# Prompt building
# ---------------------------------------------------------------------------

class MissingSource(PerfAdvisorError):
    """The supplied source lines do not cover the region's context range."""


class UnknownTemplate(PerfAdvisorError):
    """No prompt template is registered under the requested id."""


# ---------------------------------------------------------------------------
# Model gateway
# ---------------------------------------------------------------------------

class GatewayError(PerfAdvisorError):
    """Base class for model-endpoint failures."""


class EndpointUnavailable(GatewayError):
    """Connection to the endpoint failed after all retries."""


class ChatTimeout(GatewayError):
    """The response wall-clock budget was exhausted mid-stream.

    ``partial_text`` holds whatever fragments arrived before the cutoff.
    """

    def __init__(self, message: str, partial_text: str = "", chunk_count: int = 0):
        self.partial_text = partial_text
        self.chunk_count = chunk_count
        super().__init__(message)


class ProtocolError(GatewayError):
    """The server sent a frame we could not parse; offending bytes kept."""

    def __init__(self, message: str, payload: str = ""):
        self.payload = payload
        super().__init__(f"{message}: {payload!r}" if payload else message)


class ModelNotFound(GatewayError):
    """The server reported that the requested model is not installed."""


# ---------------------------------------------------------------------------
# Suggestion pipeline
# ---------------------------------------------------------------------------

class SourceMismatch(PerfAdvisorError):
    """Current source digest differs from the profile's digest (stale profile)."""


# ---------------------------------------------------------------------------
# Snippet execution / benchmarking
# ---------------------------------------------------------------------------

class BenchError(PerfAdvisorError):
    """Base class for snippet-runner failures."""


class InterpreterMissing(BenchError):
    """The configured interpreter could not be executed."""


class SnippetTimeout(BenchError):
    """The snippet exceeded its wall-clock budget and was killed."""

    def __init__(self, message: str, wall_s: float = 0.0):
        self.wall_s = wall_s
        super().__init__(message)


class NonzeroExit(BenchError):
    """The snippet exited with a nonzero status; output attached."""

    def __init__(self, exit_code: int, stdout: str = "", stderr: str = ""):
        self.exit_code = exit_code
        self.stdout = stdout
        self.stderr = stderr
        super().__init__(f"snippet exited with status {exit_code}")


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

class UnknownFormat(PerfAdvisorError):
    """The requested report format is not one of the supported ones."""
