"""JSON request/response transports for external model backends.

Both transports speak the same envelope: one JSON object in, one JSON
object out. HTTP posts it to an endpoint; subprocess writes it to the
child's stdin and reads the reply from stdout (exit status 0 required).
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import subprocess
import time
import urllib.error
import urllib.request
from contextlib import contextmanager
from typing import Any, Callable, Protocol, Sequence, TypeVar

from ..errors import BackendError, TransportError

logger = logging.getLogger("hardsynth.clients")

T = TypeVar("T")


class Transport(Protocol):
    def request(self, payload: dict[str, Any]) -> dict[str, Any]: ...


class HttpTransport:
    def __init__(self, endpoint: str, timeout_s: float = 60.0):
        self.endpoint = endpoint
        self.timeout_s = timeout_s

    def request(self, payload: dict[str, Any]) -> dict[str, Any]:
        body = json.dumps(payload).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                raw = resp.read()
        except urllib.error.HTTPError as exc:
            detail = exc.read().decode("utf-8", "replace")
            raise BackendError(f"{self.endpoint} returned HTTP {exc.code}", payload=detail) from None
        except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
            raise TransportError(f"{self.endpoint}: {exc}") from None
        return _decode_response(raw, self.endpoint)


class SubprocessTransport:
    def __init__(self, command: Sequence[str], timeout_s: float = 600.0):
        self.command = list(command)
        self.timeout_s = timeout_s

    def request(self, payload: dict[str, Any]) -> dict[str, Any]:
        try:
            proc = subprocess.run(
                self.command,
                input=json.dumps(payload).encode("utf-8"),
                capture_output=True,
                timeout=self.timeout_s,
                check=False,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise TransportError(f"{self.command[0]}: {exc}") from None
        if proc.returncode != 0:
            raise BackendError(
                f"{self.command[0]} exited with status {proc.returncode}",
                payload=(proc.stdout + proc.stderr).decode("utf-8", "replace"),
            )
        return _decode_response(proc.stdout, self.command[0])


def _decode_response(raw: bytes, source: str) -> dict[str, Any]:
    try:
        value = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise BackendError(f"{source}: response is not JSON", payload=raw[:2000]) from None
    if not isinstance(value, dict):
        raise BackendError(f"{source}: response is not a JSON object", payload=value)
    if "error" in value:
        raise BackendError(f"{source}: {value['error']}", payload=value)
    return value


def with_retry(
    fn: Callable[[], T],
    attempts: int = 3,
    base_delay_s: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
) -> T:
    """Call ``fn``, retrying TransportError with exponential backoff.
    BackendError and anything else propagate immediately."""
    for attempt in range(1, attempts + 1):
        try:
            return fn()
        except TransportError as exc:
            if attempt == attempts:
                raise TransportError(exc.reason, attempts=attempt) from None
            delay = base_delay_s * 2 ** (attempt - 1)
            logger.warning("transport failure, retry %d/%d in %.2fs: %s", attempt, attempts - 1, delay, exc)
            sleep(delay)
    raise AssertionError("unreachable")


def digest(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()[:16]


def b64_file(path) -> tuple[str, str]:
    """Return (base64 payload, digest) for a file."""
    with open(path, "rb") as fh:
        data = fh.read()
    return base64.b64encode(data).decode("ascii"), digest(data)


@contextmanager
def logged_call(client: str, op: str, input_digest: str, key: str | None = None):
    start = time.perf_counter()
    status = "ok"
    try:
        yield
    except Exception:
        status = "error"
        raise
    finally:
        logger.info(
            "%s.%s",
            client,
            op,
            extra={
                "event": "client_call",
                "client": client,
                "op": op,
                "input_digest": input_digest,
                "utt_id": key,
                "status": status,
                "latency_ms": round((time.perf_counter() - start) * 1000, 3),
            },
        )


def require(response: dict[str, Any], field: str, kind: type | tuple[type, ...]) -> Any:
    if field not in response or not isinstance(response[field], kind):
        raise BackendError(f"response missing {field!r}", payload=response)
    return response[field]
