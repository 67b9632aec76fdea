"""ASR clients: a transport-backed remote client and a seeded mock."""

from __future__ import annotations

import hashlib
import random
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .. import ctc, wav
from ..errors import BackendError
from .transport import Transport, b64_file, digest, logged_call, require, with_retry

ROLES = ("weak", "strong")

# Corruption probability per character is difficulty * sensitivity * BASE_RATE.
BASE_RATE = 0.75
DEFAULT_SENSITIVITY = {"weak": 1.0, "strong": 0.15}
_ALPHABET = string.ascii_lowercase


@dataclass(frozen=True)
class Transcription:
    """ASR output. Exactly one of ``text`` / ``posterior_path`` is set."""

    text: str | None = None
    posterior_path: str | None = None

    def resolve(self) -> str:
        if self.text is not None:
            return self.text
        if self.posterior_path is None:
            raise BackendError("transcription carries neither text nor posteriors")
        return ctc.greedy_decode(ctc.load_posteriors(self.posterior_path))


class AsrClient(Protocol):
    role: str

    def transcribe(self, audio_path: str | Path, key: str | None = None) -> Transcription: ...


class RemoteAsr:
    """Request ``{"op": "transcribe", "id", "audio_b64"}``; response
    ``{"text": ...}`` or ``{"posterior_path": ...}``."""

    def __init__(self, role: str, transport: Transport, retries: int = 3, base_delay_s: float = 0.5):
        if role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}")
        self.role = role
        self.transport = transport
        self.retries = retries
        self.base_delay_s = base_delay_s

    def transcribe(self, audio_path, key=None) -> Transcription:
        audio_b64, dig = b64_file(audio_path)
        payload = {"op": "transcribe", "id": key, "audio_b64": audio_b64}
        with logged_call(f"asr[{self.role}]", "transcribe", dig, key):
            resp = with_retry(lambda: self.transport.request(payload), self.retries, self.base_delay_s)
        if isinstance(resp.get("text"), str):
            return Transcription(text=resp["text"])
        return Transcription(posterior_path=require(resp, "posterior_path", str))


def seeded_rng(seed: int, key: str) -> random.Random:
    h = hashlib.sha256(f"{seed}\x00{key}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(h[:8], "big"))


def corrupt(text: str, probability: float, rng: random.Random) -> str:
    """Per-character noisy channel: with ``probability`` each character is
    substituted, deleted, or followed by an inserted letter (equal odds)."""
    if probability <= 0:
        return text
    out = []
    for ch in text:
        if rng.random() >= probability:
            out.append(ch)
            continue
        op = rng.randrange(3)
        if op == 0:
            out.append(rng.choice([c for c in _ALPHABET if c != ch.lower()]))
        elif op == 2:
            out.append(ch)
            out.append(rng.choice(_ALPHABET))
    return "".join(out)


def posteriors_for(text: str) -> ctc.PosteriorMatrix:
    """A posterior matrix whose greedy decode is ``text``: every symbol
    spans two frames followed by a blank frame."""
    labels = ["<blank>"] + sorted(set(text))
    index = {c: i for i, c in enumerate(labels)}
    path = []
    for ch in text:
        path += [index[ch], index[ch], 0]
    v = len(labels)
    lp = np.full((len(path), v), np.log(0.1 / max(v - 1, 1)), dtype=np.float32)
    lp[np.arange(len(path)), path] = np.log(0.9)
    return ctc.PosteriorMatrix(lp, 0, tuple(labels))


class MockAsr:
    """Reads ground truth from the WAV comment chunk (``{"text",
    "difficulty"}``) and passes it through :func:`corrupt`.

    Randomness is keyed on ``(seed, key)`` where ``key`` defaults to the file
    stem, so results never depend on call order.
    """

    def __init__(
        self,
        role: str = "weak",
        seed: int = 0,
        sensitivity: float | None = None,
        posterior_dir: str | Path | None = None,
    ):
        if role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}")
        self.role = role
        self.seed = seed
        self.sensitivity = DEFAULT_SENSITIVITY[role] if sensitivity is None else sensitivity
        self.posterior_dir = Path(posterior_dir) if posterior_dir is not None else None

    def hypothesis(self, text: str, difficulty: float, key: str) -> str:
        p = min(1.0, max(0.0, difficulty) * self.sensitivity * BASE_RATE)
        return corrupt(text, p, seeded_rng(self.seed, key))

    def transcribe(self, audio_path, key=None) -> Transcription:
        audio_path = Path(audio_path)
        key = key or audio_path.stem
        with logged_call(f"asr[{self.role}]", "transcribe", digest(audio_path.read_bytes()), key):
            meta = wav.read_info(audio_path).metadata()
            if not meta or not isinstance(meta.get("text"), str):
                raise BackendError(f"{audio_path}: no mock metadata chunk")
            hyp = self.hypothesis(meta["text"], float(meta.get("difficulty", 0.0)), key)
            if self.posterior_dir is None:
                return Transcription(text=hyp)
            self.posterior_dir.mkdir(parents=True, exist_ok=True)
            out = self.posterior_dir / f"{key}.ctcl"
            ctc.save_posteriors(posteriors_for(hyp), out)
            return Transcription(posterior_path=str(out))
