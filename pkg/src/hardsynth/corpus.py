"""Utterance / corpus data model and JSONL manifest persistence."""

from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Iterator

from . import wav
from .atomic import atomic_write_text
from .errors import DuplicateIdError, ManifestError, MissingFieldError
from .metrics import DEFAULT_POLICY, normalize

REQUIRED_FIELDS = ("id", "audio", "duration_s", "text", "speaker", "gender", "origin")
DURATION_TOLERANCE_S = 0.010


class Gender(enum.Enum):
    MALE = "m"
    FEMALE = "f"
    UNKNOWN = "u"


class Origin(enum.Enum):
    REAL = "real"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class Utterance:
    id: str
    audio_ref: str
    duration_s: float
    transcript: str
    speaker_id: str
    gender: Gender = Gender.UNKNOWN
    origin: Origin = Origin.REAL
    prompt_id: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("utterance id must be non-empty")
        if not (isinstance(self.duration_s, (int, float)) and math.isfinite(self.duration_s)) or self.duration_s <= 0:
            raise ValueError(f"{self.id}: duration_s must be a positive number, got {self.duration_s!r}")
        if not normalize(self.transcript, DEFAULT_POLICY):
            raise ValueError(f"{self.id}: transcript is empty after normalization")
        if self.origin is Origin.SYNTHETIC and not self.prompt_id:
            raise ValueError(f"{self.id}: synthetic utterance requires prompt_id")

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "id": self.id,
            "audio": self.audio_ref,
            "duration_s": self.duration_s,
            "text": self.transcript,
            "speaker": self.speaker_id,
            "gender": self.gender.value,
            "origin": self.origin.value,
        }
        if self.prompt_id is not None:
            rec["prompt_id"] = self.prompt_id
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> Utterance:
        """Build from a manifest record; extra keys are ignored."""
        for name in REQUIRED_FIELDS:
            if name not in rec:
                raise MissingFieldError(name)
        for name in ("id", "audio", "text", "speaker"):
            if not isinstance(rec[name], str):
                raise ManifestError(f"field {name!r} must be a string")
        if isinstance(rec["duration_s"], bool) or not isinstance(rec["duration_s"], (int, float)):
            raise ManifestError("field 'duration_s' must be a number")
        try:
            gender = Gender(rec["gender"])
        except ValueError:
            raise ManifestError(f"field 'gender' must be one of m/f/u, got {rec['gender']!r}") from None
        try:
            origin = Origin(rec["origin"])
        except ValueError:
            raise ManifestError(f"field 'origin' must be real or synthetic, got {rec['origin']!r}") from None
        prompt_id = rec.get("prompt_id")
        if prompt_id is not None and not isinstance(prompt_id, str):
            raise ManifestError("field 'prompt_id' must be a string")
        try:
            return cls(
                id=rec["id"],
                audio_ref=rec["audio"],
                duration_s=rec["duration_s"],
                transcript=rec["text"],
                speaker_id=rec["speaker"],
                gender=gender,
                origin=origin,
                prompt_id=prompt_id,
            )
        except ValueError as exc:
            if "prompt_id" in str(exc):
                raise MissingFieldError("prompt_id") from None
            raise ManifestError(str(exc)) from None


@dataclass(frozen=True)
class Corpus:
    """Immutable, id-sorted collection of utterances.

    ``base_dir`` is the directory relative audio paths resolve against.
    Neither it nor ``name`` take part in equality: a manifest stores only
    the records.
    """

    utterances: tuple[Utterance, ...] = ()
    name: str = field(default="", compare=False)
    base_dir: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        utts = tuple(sorted(self.utterances, key=lambda u: u.id))
        for a, b in zip(utts, utts[1:]):
            if a.id == b.id:
                raise DuplicateIdError(a.id)
        object.__setattr__(self, "utterances", utts)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    @property
    def ids(self) -> list[str]:
        return [u.id for u in self.utterances]

    @property
    def total_duration(self) -> float:
        return math.fsum(u.duration_s for u in self.utterances)

    def get(self, utt_id: str) -> Utterance:
        for u in self.utterances:
            if u.id == utt_id:
                return u
        raise KeyError(utt_id)

    def audio_path(self, utt: Utterance) -> Path:
        p = Path(utt.audio_ref)
        if not p.is_absolute() and self.base_dir is not None:
            p = self.base_dir / p
        return p

    def rebased(self, new_base: str | os.PathLike) -> Corpus:
        """Rewrite relative audio refs so they resolve the same from ``new_base``."""
        new_base = Path(new_base)
        utts = []
        for u in self.utterances:
            ref = u.audio_ref
            if not Path(ref).is_absolute() and self.base_dir is not None:
                ref = os.path.relpath(os.path.abspath(self.base_dir / ref), os.path.abspath(new_base))
            utts.append(replace(u, audio_ref=ref))
        return Corpus(tuple(utts), self.name, new_base)


def iter_records(path: str | os.PathLike) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield ``(line_number, record)`` for each non-blank JSONL line."""
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"malformed JSON ({exc.msg})", path=path, line=lineno) from None
            if not isinstance(rec, dict):
                raise ManifestError("record is not a JSON object", path=path, line=lineno)
            yield lineno, rec


def load_manifest(path: str | os.PathLike, *, name: str | None = None, validate: bool = False) -> Corpus:
    """Load a manifest; records come back sorted by id.

    With ``validate=True`` every stored duration is checked against the
    WAV header and must agree within 10 ms.
    """
    path = Path(path)
    seen: dict[str, int] = {}
    utts = []
    for lineno, rec in iter_records(path):
        try:
            utt = Utterance.from_record(rec)
        except MissingFieldError as exc:
            raise MissingFieldError(exc.field, path=str(path), line=lineno) from None
        except ManifestError as exc:
            raise ManifestError(str(exc), path=str(path), line=lineno) from None
        if utt.id in seen:
            raise DuplicateIdError(utt.id, path=str(path), line=lineno)
        seen[utt.id] = lineno
        utts.append(utt)
    corpus = Corpus(tuple(utts), name if name is not None else path.stem, path.parent)
    if validate:
        for u in corpus:
            actual = wav.duration_s(corpus.audio_path(u))
            if abs(actual - u.duration_s) > DURATION_TOLERANCE_S:
                raise ManifestError(
                    f"{u.id}: stored duration {u.duration_s:.3f}s but audio is {actual:.3f}s",
                    path=str(path),
                    line=seen[u.id],
                )
    return corpus


def dumps_records(records: Iterable[dict[str, Any]]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


def write_records(path: str | os.PathLike, records: Iterable[dict[str, Any]]) -> None:
    try:
        atomic_write_text(path, dumps_records(records))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write manifest: {exc.strerror}", str(path)) from exc


def write_manifest(corpus: Corpus, path: str | os.PathLike) -> None:
    write_records(path, (u.to_record() for u in corpus))
