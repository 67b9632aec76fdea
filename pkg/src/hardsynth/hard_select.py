"""Weak-ASR scoring and hard prompt selection under a duration budget."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .clients import AsrClient
from .corpus import Corpus, Utterance
from .metrics import DEFAULT_POLICY, NormPolicy, error_counts
from .parallel import DEFAULT_FAILURE_LIMIT, check_failures, map_ordered

logger = logging.getLogger(__name__)

# Slack on the budget comparison, so a budget computed as total/3600 in
# floating point still admits the utterances it was sized for.
BUDGET_SLACK_S = Fraction(1, 10**6)


@dataclass(frozen=True)
class ScoredUtterance:
    utterance: Utterance
    hypothesis: str | None
    cer: float | None
    error: str | None = None

    @property
    def id(self) -> str:
        return self.utterance.id

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_record(self) -> dict[str, Any]:
        rec = self.utterance.to_record()
        rec["hypothesis"] = self.hypothesis
        rec["cer"] = self.cer
        if self.error is not None:
            rec["error"] = self.error
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> ScoredUtterance:
        return cls(Utterance.from_record(rec), rec.get("hypothesis"), rec.get("cer"), rec.get("error"))


@dataclass(frozen=True)
class PromptSet:
    prompts: tuple[ScoredUtterance, ...]
    budget_hours: float
    min_duration_s: float
    strategy: str = "hard"

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.prompts]

    @property
    def total_duration_s(self) -> float:
        return float(sum((Fraction(p.utterance.duration_s) for p in self.prompts), Fraction(0)))

    def __len__(self) -> int:
        return len(self.prompts)


def score_corpus(
    corpus: Corpus,
    weak: AsrClient,
    policy: NormPolicy = DEFAULT_POLICY,
    *,
    parallelism: int = 1,
    max_failure_fraction: float = DEFAULT_FAILURE_LIMIT,
) -> list[ScoredUtterance]:
    """Transcribe every utterance with the weak model and attach its CER.

    Per-utterance failures come back with ``error`` set; the call raises
    ExcessiveFailures only when their share exceeds ``max_failure_fraction``.
    """
    utts = list(corpus)

    def score(u: Utterance) -> ScoredUtterance:
        hyp = weak.transcribe(corpus.audio_path(u), key=u.id).resolve()
        return ScoredUtterance(u, hyp, error_counts(u.transcript, hyp, "char", policy).rate)

    results = []
    failed = 0
    for u, res in zip(utts, map_ordered(score, utts, parallelism)):
        if isinstance(res, Exception):
            failed += 1
            logger.warning("score failed for %s: %s", u.id, res, extra={"stage": "score", "utt_id": u.id})
            res = ScoredUtterance(u, None, None, f"{type(res).__name__}: {res}")
        results.append(res)
    check_failures("score", failed, len(utts), max_failure_fraction)
    return results


def _eligible(scored: Iterable[ScoredUtterance], min_duration_s: float) -> list[ScoredUtterance]:
    # "Longer than" is strict: a clip of exactly min_duration_s is dropped.
    return [s for s in scored if s.ok and s.utterance.duration_s > min_duration_s]


def _take_prefix(ordered: Sequence[ScoredUtterance], budget_hours: float) -> tuple[ScoredUtterance, ...]:
    budget_s = Fraction(budget_hours) * 3600 + BUDGET_SLACK_S
    total = Fraction(0)
    taken = []
    for s in ordered:
        total += Fraction(s.utterance.duration_s)
        if total > budget_s:
            break
        taken.append(s)
    return tuple(taken)


def _check_args(budget_hours: float, min_duration_s: float) -> None:
    if not budget_hours > 0:
        raise ValueError(f"budget_hours must be > 0, got {budget_hours}")
    if not min_duration_s >= 0:
        raise ValueError(f"min_duration_s must be >= 0, got {min_duration_s}")


def select_hard_prompts(
    scored: Iterable[ScoredUtterance], min_duration_s: float = 3.0, budget_hours: float = 20.0
) -> PromptSet:
    """Drop clips not longer than ``min_duration_s``, rank the rest by
    descending CER (ties by ascending id) and keep the longest prefix that
    fits in ``budget_hours``. No skip-ahead packing: selection stops at the
    first clip that would overflow."""
    _check_args(budget_hours, min_duration_s)
    ranked = sorted(_eligible(scored, min_duration_s), key=lambda s: (-s.cer, s.id))
    return PromptSet(_take_prefix(ranked, budget_hours), budget_hours, min_duration_s, "hard")


def select_random_prompts(
    scored: Iterable[ScoredUtterance],
    min_duration_s: float = 3.0,
    budget_hours: float = 20.0,
    seed: int = 0,
) -> PromptSet:
    """Same filter and budget rule as :func:`select_hard_prompts`, but the
    ranking is a seeded shuffle (the random-prompt ablation)."""
    _check_args(budget_hours, min_duration_s)
    pool = sorted(_eligible(scored, min_duration_s), key=lambda s: s.id)
    random.Random(seed).shuffle(pool)
    return PromptSet(_take_prefix(pool, budget_hours), budget_hours, min_duration_s, "random")
