from __future__ import annotations

import struct

import numpy as np
import pytest

from hardsynth import wav
from hardsynth.errors import FormatError


def test_write_read_round_trip(tmp_path):
    p = tmp_path / "a.wav"
    wav.write(p, np.arange(-8000, 8000, dtype=np.int16), metadata={"text": "hé", "difficulty": 0.5})
    info = wav.read_info(p)
    assert (info.sample_rate, info.channels, info.bits_per_sample, info.n_frames) == (16000, 1, 16, 16000)
    assert info.duration_s == 1.0
    assert info.metadata() == {"difficulty": 0.5, "text": "hé"}


def test_no_metadata(tmp_path):
    p = tmp_path / "a.wav"
    wav.write(p, np.zeros(160, dtype=np.int16))
    assert wav.read_info(p).metadata() is None
    assert wav.duration_s(p) == 0.01


def _minimal(fmt_tag=1, block_align=2, data=b"\0\0" * 10, extra=b""):
    fmt = struct.pack("<HHIIHH", fmt_tag, 1, 16000, 32000, block_align, 16)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + extra + b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", len(body)) + body


def test_unknown_chunks_are_skipped(tmp_path):
    p = tmp_path / "a.wav"
    p.write_bytes(_minimal(extra=b"junk" + struct.pack("<I", 3) + b"abc\0"))
    assert wav.read_info(p).n_frames == 10


@pytest.mark.parametrize(
    "blob",
    [
        b"",
        b"RIFX" + b"\0" * 40,
        _minimal(fmt_tag=3),
        _minimal(data=b"\0\0\0"),
        _minimal()[:30],
        b"RIFF" + struct.pack("<I", 4) + b"WAVE",
    ],
)
def test_malformed_files(tmp_path, blob):
    p = tmp_path / "bad.wav"
    p.write_bytes(blob)
    with pytest.raises(FormatError):
        wav.read_info(p)
