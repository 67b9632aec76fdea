"""Small builders shared by the test modules."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from hardsynth import wav
from hardsynth.corpus import Gender, Origin, Utterance


def utt(uid, duration=4.0, text="hello world", speaker="s1", gender=Gender.UNKNOWN, **kw) -> Utterance:
    return Utterance(uid, kw.pop("audio_ref", f"{uid}.wav"), duration, text, speaker, gender, **kw)


def mock_wav(path, text, difficulty=0.0, duration=1.0) -> Path:
    """A WAV carrying the ground truth the mock clients read."""
    n = int(round(duration * wav.SAMPLE_RATE))
    wav.write(path, np.zeros(n, dtype=np.int16), metadata={"text": text, "difficulty": difficulty})
    return Path(path)


def synth_utt(uid, text, duration=2.0, audio_ref=None) -> Utterance:
    return Utterance(uid, audio_ref or f"{uid}.wav", duration, text, "s1", Gender.FEMALE, Origin.SYNTHETIC, "p1")
