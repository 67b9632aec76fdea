"""Real + synthetic corpus mixing and dataset statistics."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .corpus import Corpus
from .errors import IdCollision
from .metrics import DEFAULT_POLICY, NormPolicy, normalize


@dataclass(frozen=True)
class DatasetStats:
    n_utterances: int
    total_hours: float
    duration_histogram: list[tuple[int, int, int]]
    new_vocab_fraction: float
    vocab_size: int

    def to_json(self) -> str:
        d = asdict(self)
        d["duration_histogram"] = [list(b) for b in self.duration_histogram]
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_start", "bin_end", "count"])
        w.writerows(self.duration_histogram)
        return buf.getvalue()


def mix(real: Corpus, synthetic: Corpus) -> Corpus:
    """Plain union, no reweighting. Ids must be disjoint."""
    clash = set(real.ids) & set(synthetic.ids)
    if clash:
        raise IdCollision(min(clash))
    name = "+".join(n for n in (real.name, synthetic.name) if n)
    return Corpus(real.utterances + synthetic.utterances, name, real.base_dir)


def vocabulary(corpus: Corpus, policy: NormPolicy = DEFAULT_POLICY) -> set[str]:
    vocab: set[str] = set()
    for u in corpus:
        vocab.update(normalize(u.transcript, policy).split())
    return vocab


def duration_histogram(durations: list[float]) -> list[tuple[int, int, int]]:
    """Counts per right-open 1 s bin ``[n, n+1)``, from 0 to the last
    occupied bin."""
    if not durations:
        return []
    counts = [0] * (int(math.floor(max(durations))) + 1)
    for d in durations:
        counts[int(math.floor(d))] += 1
    return [(n, n + 1, c) for n, c in enumerate(counts)]


def stats(target: Corpus, reference_vocab_source: Corpus, policy: NormPolicy = DEFAULT_POLICY) -> DatasetStats:
    """Size, hours, duration histogram and the share of ``target``'s
    vocabulary that never occurs in ``reference_vocab_source``."""
    durations = [u.duration_s for u in target]
    target_vocab = vocabulary(target, policy)
    new = target_vocab - vocabulary(reference_vocab_source, policy)
    frac = Fraction(len(new), len(target_vocab)) if target_vocab else Fraction(0)
    return DatasetStats(
        n_utterances=len(target),
        total_hours=math.fsum(durations) / 3600,
        duration_histogram=duration_histogram(durations),
        new_vocab_fraction=float(frac),
        vocab_size=len(target_vocab),
    )
