"""Pair texts with hard prompts, synthesize, and drop low-fidelity output."""

from __future__ import annotations

import logging
import os
import random
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import wav
from .clients import AsrClient, TtsClient
from .corpus import Corpus, Origin, Utterance
from .errors import EmptyPromptSet, FormatError
from .hard_select import PromptSet, ScoredUtterance
from .metrics import DEFAULT_POLICY, NormPolicy, error_counts
from .parallel import DEFAULT_FAILURE_LIMIT, check_failures, map_ordered

logger = logging.getLogger(__name__)

SYNTH_PREFIX = "syn-"
PAIRING_STRATEGIES = ("uniform_random", "round_robin")


@dataclass(frozen=True)
class SynthesisJob:
    job_id: str
    target_text: str
    prompt: ScoredUtterance
    source_id: str

    def output_path(self, out_dir: str | os.PathLike) -> Path:
        return Path(out_dir) / f"{self.job_id}.wav"


@dataclass(frozen=True)
class SyntheticSample:
    utterance: Utterance
    strong_hypothesis: str
    cer: float
    kept: bool

    def to_record(self) -> dict[str, Any]:
        rec = self.utterance.to_record()
        rec.update(
            target_text=self.utterance.transcript,
            hypothesis=self.strong_hypothesis,
            cer=self.cer,
            kept=self.kept,
        )
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> SyntheticSample:
        return cls(Utterance.from_record(rec), rec["hypothesis"], rec["cer"], rec["kept"])


def assign_prompts(
    texts: Sequence[tuple[str, str]],
    prompts: PromptSet,
    strategy: str = "uniform_random",
    seed: int = 0,
) -> list[SynthesisJob]:
    """One job per ``(source_id, text)``.

    ``uniform_random`` draws a prompt per text with replacement;
    ``round_robin`` cycles through the prompts in their ranked order.
    """
    if not prompts.prompts:
        raise EmptyPromptSet("no prompts to assign")
    if not texts:
        raise ValueError("no texts to assign")
    if strategy not in PAIRING_STRATEGIES:
        raise ValueError(f"unknown pairing strategy {strategy!r}")
    pool = prompts.prompts
    rng = random.Random(seed)
    jobs = []
    for i, (source_id, text) in enumerate(texts):
        prompt = pool[i % len(pool)] if strategy == "round_robin" else rng.choice(pool)
        jobs.append(SynthesisJob(f"{SYNTH_PREFIX}{source_id}", text, prompt, source_id))
    return jobs


def _existing_duration(path: Path) -> float | None:
    if not path.is_file():
        return None
    try:
        info = wav.read_info(path)
    except (FormatError, OSError, UnicodeDecodeError):
        return None
    return info.duration_s if info.n_frames > 0 else None


def _ensure_writable(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    fd, probe = tempfile.mkstemp(dir=out_dir, prefix=".probe.")
    os.close(fd)
    os.unlink(probe)


def run_synthesis(
    jobs: Sequence[SynthesisJob],
    tts: TtsClient,
    out_dir: str | os.PathLike,
    prompt_corpus: Corpus | None = None,
    *,
    parallelism: int = 1,
    max_failure_fraction: float = DEFAULT_FAILURE_LIMIT,
    audio_ref_base: str | os.PathLike | None = None,
) -> tuple[list[Utterance], dict[str, str]]:
    """Synthesize every job into ``out_dir/<job_id>.wav``.

    Jobs whose output already exists and parses are not re-run. Returns the
    synthetic utterances (sorted by id) and a ``job_id -> error`` map for
    failed jobs. ``prompt_corpus`` resolves relative prompt audio paths;
    ``audio_ref_base`` makes the stored audio refs relative to that dir.
    """
    out_dir = Path(out_dir)
    _ensure_writable(out_dir)

    def prompt_path(job: SynthesisJob) -> Path:
        u = job.prompt.utterance
        return prompt_corpus.audio_path(u) if prompt_corpus is not None else Path(u.audio_ref)

    def one(job: SynthesisJob) -> Utterance:
        p = job.prompt.utterance
        out = job.output_path(out_dir)
        duration = _existing_duration(out)
        if duration is None:
            tts.synthesize(prompt_path(job), p.transcript, job.target_text, out)
            duration = wav.read_info(out).duration_s
        else:
            logger.info("reusing %s", out.name, extra={"stage": "synth", "utt_id": job.job_id})
        ref = os.path.relpath(out, audio_ref_base) if audio_ref_base is not None else str(out)
        return Utterance(
            id=job.job_id,
            audio_ref=ref,
            duration_s=duration,
            transcript=job.target_text,
            speaker_id=p.speaker_id,
            gender=p.gender,
            origin=Origin.SYNTHETIC,
            prompt_id=p.id,
        )

    utts = []
    failures: dict[str, str] = {}
    for job, res in zip(jobs, map_ordered(one, list(jobs), parallelism)):
        if isinstance(res, Exception):
            failures[job.job_id] = f"{type(res).__name__}: {res}"
            logger.warning("synthesis failed for %s: %s", job.job_id, res, extra={"stage": "synth", "utt_id": job.job_id})
        else:
            utts.append(res)
    check_failures("synth", len(failures), len(jobs), max_failure_fraction)
    return sorted(utts, key=lambda u: u.id), failures


def keep(errors: int, ref_len: int, gamma: float) -> bool:
    """CER strictly above gamma is dropped; gamma is read as the decimal
    the user wrote, so 1/10 against 0.1 is an exact tie and kept."""
    return Fraction(errors, ref_len) <= Fraction(str(gamma))


def filter_synthetic(
    samples: Corpus | Sequence[Utterance],
    strong: AsrClient,
    gamma: float = 0.10,
    policy: NormPolicy = DEFAULT_POLICY,
    *,
    parallelism: int = 1,
    max_failure_fraction: float = DEFAULT_FAILURE_LIMIT,
) -> list[SyntheticSample]:
    """Transcribe each synthetic utterance with the strong model and mark it
    kept iff its CER against the target text is at most ``gamma``.

    Samples whose transcription fails are dropped from the result (treated
    as filtered out), subject to the failure-fraction limit.
    """
    if not gamma >= 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    corpus = samples if isinstance(samples, Corpus) else Corpus(tuple(samples))
    utts = list(corpus)

    def one(u: Utterance) -> SyntheticSample:
        hyp = strong.transcribe(corpus.audio_path(u), key=u.id).resolve()
        counts = error_counts(u.transcript, hyp, "char", policy)
        return SyntheticSample(u, hyp, counts.rate, keep(counts.distance, counts.ref_len, gamma))

    out = []
    failed = 0
    for u, res in zip(utts, map_ordered(one, utts, parallelism)):
        if isinstance(res, Exception):
            failed += 1
            logger.warning("filter transcription failed for %s: %s", u.id, res, extra={"stage": "filter", "utt_id": u.id})
        else:
            out.append(res)
    check_failures("filter", failed, len(utts), max_failure_fraction)
    return out
