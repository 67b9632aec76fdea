"""Greedy CTC decoding and the CTCL posterior file format.

CTCL layout (all little-endian)::

    b"CTCL" | u32 T | u32 V | u32 blank_index | T*V float32, row-major

The V label strings live in a JSON sidecar ``<file>.labels.json``.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .atomic import atomic_write_bytes, atomic_write_text
from .errors import FormatError

MAGIC = b"CTCL"
_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True, eq=False)
class PosteriorMatrix:
    logprobs: np.ndarray
    blank_index: int
    labels: tuple[str, ...]

    def __post_init__(self):
        lp = np.asarray(self.logprobs, dtype=np.float32)
        if lp.ndim != 2:
            if lp.size == 0:
                lp = lp.reshape(0, len(self.labels))
            else:
                raise ValueError(f"logprobs must be 2-D, got shape {lp.shape}")
        object.__setattr__(self, "logprobs", lp)
        object.__setattr__(self, "labels", tuple(self.labels))
        if lp.shape[1] != len(self.labels):
            raise ValueError(f"vocab size {lp.shape[1]} does not match {len(self.labels)} labels")
        if not 0 <= self.blank_index < len(self.labels):
            raise ValueError(f"blank_index {self.blank_index} outside [0, {len(self.labels)})")

    @property
    def frames(self) -> int:
        return self.logprobs.shape[0]

    @property
    def vocab(self) -> int:
        return self.logprobs.shape[1]

    def validate_normalized(self, atol: float = 1e-3) -> None:
        """Raise if any row is not a log-probability vector."""
        if self.frames == 0:
            return
        lp = self.logprobs.astype(np.float64)
        top = lp.max(axis=1, keepdims=True)
        lse = (top + np.log(np.exp(lp - top).sum(axis=1, keepdims=True))).ravel()
        bad = np.flatnonzero(np.abs(lse) > atol)
        if bad.size:
            raise ValueError(f"row {int(bad[0])} logsumexp is {lse[bad[0]]:.4g}, expected 0")

    def __eq__(self, other):
        if not isinstance(other, PosteriorMatrix):
            return NotImplemented
        return (
            self.blank_index == other.blank_index
            and self.labels == other.labels
            and self.logprobs.shape == other.logprobs.shape
            and self.logprobs.tobytes() == other.logprobs.tobytes()
        )


def collapse_path(path: Sequence[int], blank_index: int) -> list[int]:
    """Merge consecutive repeats, then drop blanks."""
    out = []
    prev = None
    for k in path:
        if k != prev and k != blank_index:
            out.append(k)
        prev = k
    return out


def greedy_decode(m: PosteriorMatrix, *, validate: bool = False) -> str:
    """Best-path decoding: per-frame argmax (lowest index wins ties),
    collapse repeats, remove blanks, join labels with no separator."""
    if validate:
        m.validate_normalized()
    if m.frames == 0:
        return ""
    path = np.argmax(m.logprobs, axis=1).tolist()
    return "".join(m.labels[k] for k in collapse_path(path, m.blank_index))


def labels_path(path: str | os.PathLike) -> Path:
    return Path(f"{os.fspath(path)}.labels.json")


def save_posteriors(m: PosteriorMatrix, path: str | os.PathLike) -> None:
    payload = _HEADER.pack(MAGIC, m.frames, m.vocab, m.blank_index)
    payload += np.ascontiguousarray(m.logprobs, dtype="<f4").tobytes()
    atomic_write_text(labels_path(path), json.dumps(list(m.labels), ensure_ascii=False))
    atomic_write_bytes(path, payload)


def load_posteriors(path: str | os.PathLike) -> PosteriorMatrix:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, t, v, blank = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 4 * t * v
    if len(data) < expected:
        raise FormatError(f"{path}: truncated payload ({len(data)} of {expected} bytes)")
    if len(data) > expected:
        raise FormatError(f"{path}: {len(data) - expected} trailing bytes")
    if v == 0 or blank >= v:
        raise FormatError(f"{path}: blank_index {blank} out of range for V={v}")
    try:
        labels = json.loads(labels_path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FormatError(f"{path}: missing label sidecar {labels_path(path).name}") from None
    if not isinstance(labels, list) or len(labels) != v or not all(isinstance(x, str) for x in labels):
        raise FormatError(f"{path}: label sidecar must list {v} strings")
    lp = np.frombuffer(data, dtype="<f4", count=t * v, offset=_HEADER.size).reshape(t, v)
    return PosteriorMatrix(lp.astype(np.float32), blank, tuple(labels))
