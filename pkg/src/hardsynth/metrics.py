"""Text normalization and edit-distance based error rates (CER / WER).

All counting is done on integers; rates are converted to ``float`` only
when requested through :attr:`AlignmentCounts.rate`.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Literal, Sequence

from .errors import EmptyReference

Unit = Literal["char", "word"]

_APOSTROPHES = {"'", "’", "ʼ"}
# Hyphen-like characters become word separators.
_HYPHENS = {"-", "‐", "‑", "‒", "–", "—", "―", "−"}


@dataclass(frozen=True, slots=True)
class NormPolicy:
    lowercase: bool = True
    strip_punct: bool = True
    collapse_whitespace: bool = True


DEFAULT_POLICY = NormPolicy()


def _is_punct(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return cat[0] in "PS"


def _is_wordchar(ch: str) -> bool:
    return ch.isalnum() or unicodedata.category(ch)[0] == "M"


def _strip_punct(text: str) -> str:
    out = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch in _HYPHENS:
            out.append(" ")
        elif ch in _APOSTROPHES:
            if 0 < i < n - 1 and _is_wordchar(text[i - 1]) and _is_wordchar(text[i + 1]):
                out.append("'")
        elif _is_punct(ch):
            continue
        else:
            out.append(ch)
    return "".join(out)


def normalize(text: str, policy: NormPolicy = DEFAULT_POLICY) -> str:
    """Apply ``policy`` to ``text``.

    Punctuation stripping keeps apostrophes that sit between two word
    characters ("it's") and turns hyphens into spaces ("half-smiling" ->
    "half smiling"); every other punctuation or symbol character is dropped.

    >>> normalize("The Girl, hesitated.")
    'the girl hesitated'
    """
    if policy.lowercase:
        text = text.lower()
    if policy.strip_punct:
        text = _strip_punct(text)
    if policy.collapse_whitespace:
        text = " ".join(text.split())
    return text


def tokenize(text: str, unit: Unit) -> list[str]:
    if unit == "char":
        return list(text)
    if unit == "word":
        return text.split()
    raise ValueError(f"unknown unit {unit!r}")


@dataclass(frozen=True, slots=True)
class AlignmentCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_len: int = 0

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def ratio(self) -> Fraction:
        if self.ref_len == 0:
            raise EmptyReference("error rate undefined for an empty reference")
        return Fraction(self.distance, self.ref_len)

    @property
    def rate(self) -> float:
        return float(self.ratio)

    def __add__(self, other: AlignmentCounts) -> AlignmentCounts:
        return AlignmentCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.ref_len + other.ref_len,
        )


def edit_distance(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> AlignmentCounts:
    """Minimal unit-cost alignment of ``hyp`` against ``ref``.

    Among alignments of minimal distance, the one with the fewest
    insertions + deletions (i.e. the most substitutions) is reported.
    Each cell holds ``distance * w + gaps`` with ``w`` larger than any gap
    count, so a single integer minimum orders by distance first and gaps
    second. S, D and I are then recovered from the closed-form relations
    ``D - I = len(ref) - len(hyp)`` and ``S = distance - gaps``.
    """
    n, m = len(ref), len(hyp)
    if n == 0 or m == 0:
        return AlignmentCounts(0, n, m, n)
    w = n + m + 1
    gap = w + 1
    prev = list(range(0, (m + 1) * gap, gap))
    for i in range(1, n + 1):
        r = ref[i - 1]
        cur = [i * gap]
        left = cur[0]
        for j in range(1, m + 1):
            best = prev[j - 1] if r == hyp[j - 1] else prev[j - 1] + w
            up = prev[j] + gap
            if up < best:
                best = up
            left += gap
            if left < best:
                best = left
            cur.append(best)
            left = best
        prev = cur
    dist, gaps = divmod(prev[m], w)
    length_diff = n - m
    deletions = (gaps + length_diff) // 2
    insertions = (gaps - length_diff) // 2
    return AlignmentCounts(dist - gaps, deletions, insertions, n)


def error_counts(ref: str, hyp: str, unit: Unit, policy: NormPolicy = DEFAULT_POLICY) -> AlignmentCounts:
    ref_tokens = tokenize(normalize(ref, policy), unit)
    if not ref_tokens:
        raise EmptyReference(f"reference {ref!r} is empty after normalization")
    return edit_distance(ref_tokens, tokenize(normalize(hyp, policy), unit))


def cer(ref: str, hyp: str, policy: NormPolicy = DEFAULT_POLICY) -> float:
    """Character error rate; spaces of the normalized text count as characters."""
    return error_counts(ref, hyp, "char", policy).rate


def wer(ref: str, hyp: str, policy: NormPolicy = DEFAULT_POLICY) -> float:
    return error_counts(ref, hyp, "word", policy).rate


def corpus_counts(
    pairs: Iterable[tuple[str, str]], unit: Unit, policy: NormPolicy = DEFAULT_POLICY
) -> AlignmentCounts:
    """Summed counts over all pairs. Pairs whose reference normalizes to
    empty contribute their insertions but no reference tokens."""
    total = AlignmentCounts()
    for ref, hyp in pairs:
        ref_tokens = tokenize(normalize(ref, policy), unit)
        total = total + edit_distance(ref_tokens, tokenize(normalize(hyp, policy), unit))
    if total.ref_len == 0:
        raise EmptyReference("all references are empty after normalization")
    return total


def corpus_error_rate(
    pairs: Iterable[tuple[str, str]], unit: Unit = "word", policy: NormPolicy = DEFAULT_POLICY
) -> float:
    """Micro-averaged error rate: total edits over total reference tokens."""
    return corpus_counts(pairs, unit, policy).rate
