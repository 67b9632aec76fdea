"""Minimal RIFF/WAVE reader and writer.

Only what the toolkit needs: header fields, duration, and a JSON payload
stored in a ``LIST/INFO/ICMT`` comment chunk (used by the mock backends).
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass
from typing import Any

import numpy as np

from .atomic import atomic_write_bytes
from .errors import FormatError

SAMPLE_RATE = 16000


@dataclass(frozen=True)
class WavInfo:
    sample_rate: int
    channels: int
    bits_per_sample: int
    n_frames: int
    comment: str | None = None

    @property
    def duration_s(self) -> float:
        return self.n_frames / self.sample_rate

    def metadata(self) -> dict[str, Any] | None:
        """The comment chunk decoded as JSON, or None if absent or not JSON."""
        if not self.comment:
            return None
        try:
            value = json.loads(self.comment)
        except json.JSONDecodeError:
            return None
        return value if isinstance(value, dict) else None


def _iter_chunks(data: bytes, start: int, end: int, path: str):
    pos = start
    while pos + 8 <= end:
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = pos + 8
        if body + size > end:
            raise FormatError(f"{path}: chunk {cid!r} runs past end of file")
        yield cid, data[body : body + size]
        pos = body + size + (size & 1)


def read_info(path: str | os.PathLike) -> WavInfo:
    """Parse the header of a PCM WAV file."""
    path = str(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")
    riff_end = min(len(data), 8 + struct.unpack_from("<I", data, 4)[0])
    fmt = None
    n_data = None
    comment = None
    for cid, body in _iter_chunks(data, 12, riff_end, path):
        if cid == b"fmt ":
            if len(body) < 16:
                raise FormatError(f"{path}: short fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            n_data = len(body)
        elif cid == b"LIST" and body[:4] == b"INFO":
            for sub, sbody in _iter_chunks(body, 4, len(body), path):
                if sub == b"ICMT":
                    comment = sbody.rstrip(b"\x00").decode("utf-8")
    if fmt is None or n_data is None:
        raise FormatError(f"{path}: missing fmt or data chunk")
    tag, channels, rate, _, block_align, bits = fmt
    if tag != 1:
        raise FormatError(f"{path}: unsupported format tag {tag} (PCM only)")
    if rate <= 0 or channels <= 0 or block_align <= 0:
        raise FormatError(f"{path}: invalid fmt fields")
    if n_data % block_align:
        raise FormatError(f"{path}: data size not a multiple of block alignment")
    return WavInfo(rate, channels, bits, n_data // block_align, comment)


def duration_s(path: str | os.PathLike) -> float:
    return read_info(path).duration_s


def encode(samples: np.ndarray, sample_rate: int = SAMPLE_RATE, comment: str | None = None) -> bytes:
    """Encode mono float samples in [-1, 1] as 16-bit PCM WAV bytes."""
    pcm = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(pcm * 32767).astype("<i2").tobytes()
    chunks = [
        b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, sample_rate, sample_rate * 2, 2, 16),
    ]
    if comment is not None:
        text = comment.encode("utf-8") + b"\x00"
        icmt = b"ICMT" + struct.pack("<I", len(text)) + text + (b"\x00" if len(text) & 1 else b"")
        info = b"INFO" + icmt
        chunks.append(b"LIST" + struct.pack("<I", len(info)) + info)
    chunks.append(b"data" + struct.pack("<I", len(pcm)) + pcm + (b"\x00" if len(pcm) & 1 else b""))
    body = b"WAVE" + b"".join(chunks)
    return b"RIFF" + struct.pack("<I", len(body)) + body


def write(
    path: str | os.PathLike,
    samples: np.ndarray,
    sample_rate: int = SAMPLE_RATE,
    metadata: dict[str, Any] | None = None,
) -> None:
    comment = None if metadata is None else json.dumps(metadata, sort_keys=True, ensure_ascii=False)
    atomic_write_bytes(path, encode(samples, sample_rate, comment))
