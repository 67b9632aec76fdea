"""Speaker-embedding and MOS scorer clients."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Protocol

import numpy as np

from ..errors import BackendError
from .transport import Transport, b64_file, digest, logged_call, require, with_retry


class ScorerClient(Protocol):
    def embed(self, audio_path: str | Path) -> np.ndarray: ...

    def mos(self, audio_path: str | Path) -> float: ...


class RemoteScorer:
    """``{"op": "embed", "audio_b64"}`` -> ``{"vector": [...]}`` and
    ``{"op": "mos", "audio_b64"}`` -> ``{"score": x}``."""

    def __init__(self, transport: Transport, retries: int = 3, base_delay_s: float = 0.5):
        self.transport = transport
        self.retries = retries
        self.base_delay_s = base_delay_s

    def _call(self, op: str, audio_path) -> dict:
        audio_b64, dig = b64_file(audio_path)
        payload = {"op": op, "audio_b64": audio_b64}
        with logged_call("scorer", op, dig, Path(audio_path).stem):
            return with_retry(lambda: self.transport.request(payload), self.retries, self.base_delay_s)

    def embed(self, audio_path) -> np.ndarray:
        vec = require(self._call("embed", audio_path), "vector", list)
        try:
            arr = np.asarray(vec, dtype=np.float64)
        except (TypeError, ValueError):
            raise BackendError("vector is not numeric", payload=vec) from None
        if arr.ndim != 1 or arr.size == 0:
            raise BackendError("vector must be a non-empty 1-D list", payload=vec)
        return arr

    def mos(self, audio_path) -> float:
        return float(require(self._call("mos", audio_path), "score", (int, float)))


class MockScorer:
    """Unit vector seeded by the file's SHA-256; constant MOS."""

    def __init__(self, dim: int = 16, mos_value: float = 3.0):
        self.dim = dim
        self.mos_value = mos_value

    def embed(self, audio_path) -> np.ndarray:
        data = Path(audio_path).read_bytes()
        with logged_call("scorer", "embed", digest(data), Path(audio_path).stem):
            seed = int.from_bytes(hashlib.sha256(data).digest()[:8], "big")
            v = np.random.default_rng(seed).standard_normal(self.dim)
            return v / np.linalg.norm(v)

    def mos(self, audio_path) -> float:
        with logged_call("scorer", "mos", digest(Path(audio_path).read_bytes()), Path(audio_path).stem):
            return self.mos_value
