"""Exception hierarchy shared by all stages."""

from __future__ import annotations


class HardSynthError(Exception):
    """Base class for toolkit errors."""


class ManifestError(HardSynthError, ValueError):
    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(f"{where}{message}")


class DuplicateIdError(ManifestError):
    def __init__(self, utt_id: str, **kwargs):
        self.utt_id = utt_id
        super().__init__(f"duplicate id {utt_id!r}", **kwargs)


class MissingFieldError(ManifestError):
    def __init__(self, field: str, **kwargs):
        self.field = field
        super().__init__(f"missing required field {field!r}", **kwargs)


class IdCollision(HardSynthError, ValueError):
    def __init__(self, utt_id: str):
        self.utt_id = utt_id
        super().__init__(f"id {utt_id!r} present in both corpora")


class EmptyReference(HardSynthError, ValueError):
    """Reference text is empty after normalization."""


class FormatError(HardSynthError, ValueError):
    """Binary or audio file does not match its declared format."""


class ExcessiveFailures(HardSynthError):
    def __init__(self, stage: str, failed: int, total: int, limit: float):
        self.stage = stage
        self.failed = failed
        self.total = total
        self.limit = limit
        super().__init__(
            f"{stage}: {failed}/{total} items failed, above the allowed fraction {limit:g}"
        )


class EmptySentence(HardSynthError, ValueError):
    pass


class EmptyAfterCleanup(HardSynthError, ValueError):
    pass


class EmptyPromptSet(HardSynthError, ValueError):
    pass


class EmptyInput(HardSynthError, ValueError):
    pass


class ZeroDuration(HardSynthError, ValueError):
    pass


class DimensionMismatch(HardSynthError, ValueError):
    pass


class ZeroNorm(HardSynthError, ValueError):
    pass


class ConfigError(HardSynthError):
    """One or more configuration problems, each tagged with its key path."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        lines = [f"{key}: {msg}" for key, msg in problems]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


class ClientError(HardSynthError):
    """Failure talking to an external model backend."""


class TransportError(ClientError):
    """Backend could not be reached; safe to retry."""

    def __init__(self, message: str, attempts: int = 1):
        self.reason = message
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempt{'s' if attempts != 1 else ''})")


class BackendError(ClientError):
    """Backend answered with a failure; not retried."""

    def __init__(self, message: str, payload: object = None):
        self.payload = payload
        super().__init__(message)


class InvalidRequest(ClientError, ValueError):
    pass


class MissingInput(HardSynthError):
    """A stage was started before the stages it depends on produced output."""
