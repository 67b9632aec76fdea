"""LLM rewriting of training transcripts into same-meaning sentences."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Any, Sequence

from .clients import LlmClient
from .errors import ClientError, EmptyAfterCleanup, EmptySentence
from .metrics import DEFAULT_POLICY, NormPolicy, normalize
from .parallel import DEFAULT_FAILURE_LIMIT, check_failures, map_ordered

logger = logging.getLogger(__name__)

PROMPT_TEMPLATE = (
    "You are a professional text rewriter.\n"
    "Please rewrite the following sentence without changing its meaning. "
    "Please give the rewritten sentence directly.\n"
    "Sentence: "
)

_LABEL_RE = re.compile(r"^\s*(?:rewritten\s+sentence|sentence)\s*:\s*", re.I)
_QUOTES = "\"'`“”‘’«»"


@dataclass(frozen=True)
class RewriteFilters:
    reject_identical: bool = True
    min_length_ratio: float = 0.3
    max_length_ratio: float = 3.0


@dataclass(frozen=True)
class RewritePair:
    id: str
    original: str
    rewritten: str
    status: str  # "ok" | "rejected"
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_record(self) -> dict[str, Any]:
        rec = {"id": self.id, "original": self.original, "rewritten": self.rewritten, "status": self.status}
        if self.reason is not None:
            rec["reason"] = self.reason
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> RewritePair:
        return cls(rec["id"], rec["original"], rec["rewritten"], rec["status"], rec.get("reason"))


def build_prompt(sentence: str) -> str:
    # Plain concatenation: braces in the sentence must not be re-templated.
    if not sentence or not sentence.strip():
        raise EmptySentence("cannot build a rewrite prompt for an empty sentence")
    return PROMPT_TEMPLATE + sentence


def postprocess_response(raw: str, policy: NormPolicy = DEFAULT_POLICY) -> str:
    """Reduce a chat-style answer to one normalized sentence."""
    for line in raw.splitlines():
        line = line.strip()
        while True:
            stripped = _LABEL_RE.sub("", line, count=1).strip().strip(_QUOTES).strip()
            if stripped == line:
                break
            line = stripped
        if line:
            cleaned = normalize(line, policy)
            if cleaned:
                return cleaned
    raise EmptyAfterCleanup(f"nothing left of LLM response {raw!r}")


def _length_ratio(original: str, rewritten: str) -> float:
    return len(rewritten) / max(len(original), 1)


def rewrite_corpus(
    texts: Sequence[tuple[str, str]],
    llm: LlmClient,
    policy: NormPolicy = DEFAULT_POLICY,
    filters: RewriteFilters = RewriteFilters(),
    *,
    parallelism: int = 1,
    max_failure_fraction: float = DEFAULT_FAILURE_LIMIT,
) -> list[RewritePair]:
    """Rewrite every ``(id, sentence)``; one RewritePair per input, in order.

    Client failures count toward ``max_failure_fraction``; filter
    rejections do not.
    """

    def one(item: tuple[str, str]) -> str:
        return llm.complete(build_prompt(item[1]))

    pairs = []
    failed = 0
    for (utt_id, sentence), raw in zip(texts, map_ordered(one, list(texts), parallelism)):
        if isinstance(raw, Exception):
            if isinstance(raw, ClientError):
                failed += 1
            logger.warning("rewrite failed for %s: %s", utt_id, raw, extra={"stage": "rewrite", "utt_id": utt_id})
            pairs.append(RewritePair(utt_id, sentence, "", "rejected", f"error: {raw}"))
            continue
        pairs.append(_judge(utt_id, sentence, raw, policy, filters))
    check_failures("rewrite", failed, len(pairs), max_failure_fraction)
    return pairs


def _judge(utt_id: str, sentence: str, raw: str, policy: NormPolicy, filters: RewriteFilters) -> RewritePair:
    try:
        rewritten = postprocess_response(raw, policy)
    except EmptyAfterCleanup:
        return RewritePair(utt_id, sentence, "", "rejected", "empty")
    original = normalize(sentence, policy)
    if filters.reject_identical and rewritten == original:
        return RewritePair(utt_id, sentence, rewritten, "rejected", "identical")
    ratio = _length_ratio(original, rewritten)
    if not filters.min_length_ratio <= ratio <= filters.max_length_ratio:
        return RewritePair(utt_id, sentence, rewritten, "rejected", f"length_ratio {ratio:.3f}")
    return RewritePair(utt_id, sentence, rewritten, "ok")
