"""WER reporting with speaker / gender bias statistics, and similarity
metrics between synthetic audio and its prompt."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .clients import ScorerClient
from .corpus import Corpus, Gender, Utterance
from .errors import DimensionMismatch, EmptyInput, ZeroDuration, ZeroNorm
from .metrics import DEFAULT_POLICY, AlignmentCounts, NormPolicy, error_counts, normalize
from .parallel import DEFAULT_FAILURE_LIMIT, check_failures, map_ordered

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupWer:
    wer: float
    n_ref_words: int


@dataclass(frozen=True)
class EvalReport:
    overall_wer: float
    per_speaker: dict[str, GroupWer]
    per_gender: dict[str, GroupWer]
    gender_gap: float | None
    speaker_variance: float
    n_utterances: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def speakers_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["speaker", "wer", "n_ref_words"])
        for spk in sorted(self.per_speaker):
            g = self.per_speaker[spk]
            w.writerow([spk, repr(g.wer), g.n_ref_words])
        return buf.getvalue()


def _pp(x: Fraction) -> Fraction:
    return x * 100


def wer_report(
    pairs: Sequence[tuple[Utterance, str]],
    policy: NormPolicy = DEFAULT_POLICY,
    *,
    absolute_gap: bool = False,
) -> EvalReport:
    """Micro-averaged WER overall, per speaker and per gender.

    ``gender_gap`` is male minus female WER in percentage points (None when
    either gender has no reference words); ``speaker_variance`` is the
    population variance of per-speaker WERs in percentage points squared.
    Utterances of unknown gender count everywhere except the gender gap.
    """
    if not pairs:
        raise EmptyInput("wer_report needs at least one pair")
    by_speaker: dict[str, AlignmentCounts] = defaultdict(AlignmentCounts)
    by_gender: dict[Gender, AlignmentCounts] = defaultdict(AlignmentCounts)
    total = AlignmentCounts()
    for utt, hyp in pairs:
        c = error_counts(utt.transcript, hyp, "word", policy)
        total += c
        by_speaker[utt.speaker_id] += c
        by_gender[utt.gender] += c

    speaker_rates = [_pp(c.ratio) for c in by_speaker.values()]
    mean = sum(speaker_rates, Fraction(0)) / len(speaker_rates)
    variance = sum(((r - mean) ** 2 for r in speaker_rates), Fraction(0)) / len(speaker_rates)

    male, female = by_gender.get(Gender.MALE), by_gender.get(Gender.FEMALE)
    if male is None or female is None or not male.ref_len or not female.ref_len:
        logger.warning("gender gap unavailable: need reference words from both male and female speakers")
        gap = None
    else:
        gap_pp = _pp(male.ratio) - _pp(female.ratio)
        gap = float(abs(gap_pp) if absolute_gap else gap_pp)

    return EvalReport(
        overall_wer=total.rate,
        per_speaker={s: GroupWer(c.rate, c.ref_len) for s, c in sorted(by_speaker.items())},
        per_gender={g.name.lower(): GroupWer(c.rate, c.ref_len) for g, c in sorted(by_gender.items(), key=lambda kv: kv[0].value)},
        gender_gap=gap,
        speaker_variance=float(variance),
        n_utterances=len(pairs),
    )


def speaking_speed(utt: Utterance, policy: NormPolicy = DEFAULT_POLICY) -> float:
    if utt.duration_s <= 0:
        raise ZeroDuration(f"{utt.id}: duration must be positive")
    return len(normalize(utt.transcript, policy).split()) / utt.duration_s


def speaking_speed_delta(
    pairs: Sequence[tuple[Utterance, Utterance]], policy: NormPolicy = DEFAULT_POLICY
) -> float:
    """Mean absolute difference in words per second, generated vs prompt."""
    if not pairs:
        raise EmptyInput("speaking_speed_delta needs at least one pair")
    diffs = [abs(speaking_speed(g, policy) - speaking_speed(p, policy)) for g, p in pairs]
    return math.fsum(diffs) / len(diffs)


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape or a.size == 0:
        raise DimensionMismatch(f"cannot compare vectors of dimension {a.size} and {b.size}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroNorm("cosine similarity undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class SimilarityReport:
    mean_sim_spk: float
    mean_mos: float
    n_pairs: int


def similarity_report(
    pairs: Sequence[tuple[str, str]],
    scorer: ScorerClient,
    *,
    parallelism: int = 1,
    max_failure_fraction: float = DEFAULT_FAILURE_LIMIT,
) -> SimilarityReport:
    """Mean speaker-embedding cosine (generated vs prompt) and mean MOS of
    the generated audio over ``(generated_path, prompt_path)`` pairs."""
    if not pairs:
        raise EmptyInput("similarity_report needs at least one pair")

    def one(pair):
        gen, prompt = pair
        return cosine_similarity(scorer.embed(gen), scorer.embed(prompt)), scorer.mos(gen)

    results = map_ordered(one, list(pairs), parallelism)
    good = [r for r in results if not isinstance(r, Exception)]
    for pair, r in zip(pairs, results):
        if isinstance(r, Exception):
            logger.warning("scoring failed for %s: %s", pair[0], r)
    check_failures("similarity", len(pairs) - len(good), len(pairs), max_failure_fraction)
    if not good:
        raise EmptyInput("no pair could be scored")
    return SimilarityReport(
        mean_sim_spk=math.fsum(s for s, _ in good) / len(good),
        mean_mos=math.fsum(m for _, m in good) / len(good),
        n_pairs=len(good),
    )


def prompt_pairs(synthetic: Corpus, prompts: Corpus) -> list[tuple[Utterance, Utterance]]:
    """Match each synthetic utterance with the prompt it was cloned from."""
    index = {u.id: u for u in prompts}
    out = []
    for u in synthetic:
        if u.prompt_id not in index:
            raise KeyError(f"{u.id}: prompt {u.prompt_id!r} not found")
        out.append((u, index[u.prompt_id]))
    return out
