"""Zero-shot TTS clients: clone the style of a prompt recording for new text."""

from __future__ import annotations

import base64
import hashlib
from pathlib import Path
from typing import Protocol

import numpy as np

from .. import wav
from ..atomic import atomic_write_bytes
from ..errors import BackendError, InvalidRequest
from ..metrics import normalize
from .transport import Transport, b64_file, digest, logged_call, require, with_retry

DEFAULT_MIN_PROMPT_S = 3.0


class TtsClient(Protocol):
    def synthesize(
        self, prompt_audio: str | Path, prompt_text: str, target_text: str, out_path: str | Path
    ) -> Path: ...


def _check_prompt_length(prompt_audio, min_prompt_s: float) -> wav.WavInfo:
    info = wav.read_info(prompt_audio)
    if info.duration_s < min_prompt_s:
        raise InvalidRequest(
            f"{prompt_audio}: prompt is {info.duration_s:.2f}s, below the {min_prompt_s:g}s minimum"
        )
    return info


class RemoteTts:
    """Request ``{"op": "synthesize", "prompt_audio_b64", "prompt_text",
    "target_text"}``; response ``{"audio_b64"}`` (a WAV file)."""

    def __init__(
        self,
        transport: Transport,
        min_prompt_s: float = DEFAULT_MIN_PROMPT_S,
        retries: int = 3,
        base_delay_s: float = 0.5,
    ):
        self.transport = transport
        self.min_prompt_s = min_prompt_s
        self.retries = retries
        self.base_delay_s = base_delay_s

    def synthesize(self, prompt_audio, prompt_text, target_text, out_path) -> Path:
        if not target_text.strip():
            raise InvalidRequest("empty target text")
        _check_prompt_length(prompt_audio, self.min_prompt_s)
        audio_b64, dig = b64_file(prompt_audio)
        payload = {
            "op": "synthesize",
            "prompt_audio_b64": audio_b64,
            "prompt_text": prompt_text,
            "target_text": target_text,
        }
        with logged_call("tts", "synthesize", digest(dig + target_text), Path(out_path).stem):
            resp = with_retry(lambda: self.transport.request(payload), self.retries, self.base_delay_s)
        try:
            data = base64.b64decode(require(resp, "audio_b64", str), validate=True)
        except ValueError:
            raise BackendError("audio_b64 is not valid base64", payload=None) from None
        atomic_write_bytes(out_path, data)
        wav.read_info(out_path)
        return Path(out_path)


def tone_pattern(words: list[str], duration_s: float, sample_rate: int = wav.SAMPLE_RATE) -> np.ndarray:
    """One sine segment per word, pitch derived from the word's hash."""
    n = int(round(duration_s * sample_rate))
    out = np.zeros(n, dtype=np.float64)
    if not words or n == 0:
        return out
    bounds = np.linspace(0, n, len(words) + 1).round().astype(int)
    for w, a, b in zip(words, bounds[:-1], bounds[1:]):
        h = int.from_bytes(hashlib.sha256(w.encode("utf-8")).digest()[:2], "big")
        freq = 150.0 + (h % 400)
        t = np.arange(b - a) / sample_rate
        out[a:b] = 0.3 * np.sin(2 * np.pi * freq * t)
    return out


class MockTts:
    """Writes a tone-pattern WAV lasting ``words(target) / speed(prompt)``
    seconds, where the prompt speed is its transcript word count over its
    duration. The prompt's ``difficulty`` metadata is carried into the
    output comment chunk together with the target text, so a mock ASR can
    transcribe it back."""

    def __init__(self, min_prompt_s: float = DEFAULT_MIN_PROMPT_S):
        self.min_prompt_s = min_prompt_s

    def synthesize(self, prompt_audio, prompt_text, target_text, out_path) -> Path:
        target_words = normalize(target_text).split()
        if not target_words:
            raise InvalidRequest("empty target text")
        with logged_call("tts", "synthesize", digest(f"{Path(prompt_audio).name}\x00{target_text}"), Path(out_path).stem):
            info = _check_prompt_length(prompt_audio, self.min_prompt_s)
            prompt_words = normalize(prompt_text).split()
            if not prompt_words:
                raise InvalidRequest("empty prompt transcript")
            speed = len(prompt_words) / info.duration_s
            meta = info.metadata() or {}
            metadata = {
                "text": target_text,
                "difficulty": float(meta.get("difficulty", 0.0)),
            }
            duration = len(target_words) / speed
            wav.write(out_path, tone_pattern(target_words, duration), metadata=metadata)
        return Path(out_path)
