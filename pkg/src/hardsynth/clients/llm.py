"""LLM completion clients."""

from __future__ import annotations

from typing import Protocol

from ..errors import InvalidRequest
from .asr import seeded_rng
from .transport import Transport, digest, logged_call, require, with_retry


class LlmClient(Protocol):
    def complete(self, prompt: str) -> str: ...


def _check_prompt(prompt: str) -> None:
    if not isinstance(prompt, str) or not prompt.strip():
        raise InvalidRequest("empty prompt")


class RemoteLlm:
    """Request ``{"op": "complete", "prompt"}``; response ``{"text"}``."""

    def __init__(self, transport: Transport, retries: int = 3, base_delay_s: float = 0.5):
        self.transport = transport
        self.retries = retries
        self.base_delay_s = base_delay_s

    def complete(self, prompt: str) -> str:
        _check_prompt(prompt)
        payload = {"op": "complete", "prompt": prompt}
        with logged_call("llm", "complete", digest(prompt)):
            resp = with_retry(lambda: self.transport.request(payload), self.retries, self.base_delay_s)
        return require(resp, "text", str)


SYNONYMS: dict[str, tuple[str, ...]] = {
    "hesitated": ("paused", "faltered", "wavered"),
    "moment": ("instant", "second", "while"),
    "girl": ("young woman", "lass", "maiden"),
    "boy": ("lad", "youngster"),
    "dangerous": ("perilous", "risky", "hazardous"),
    "glorious": ("splendid", "magnificent", "grand"),
    "said": ("remarked", "stated", "replied"),
    "smiling": ("grinning", "beaming"),
    "going": ("heading", "setting off"),
    "sea": ("ocean", "the waves"),
    "mission": ("task", "undertaking", "quest"),
    "little": ("small", "tiny"),
    "great": ("large", "vast", "immense"),
    "old": ("aged", "elderly", "ancient"),
    "looked": ("gazed", "glanced", "peered"),
    "quickly": ("swiftly", "rapidly", "hastily"),
    "house": ("home", "dwelling", "residence"),
    "man": ("fellow", "gentleman"),
    "woman": ("lady", "dame"),
    "began": ("started", "commenced"),
    "walked": ("strolled", "went", "stepped"),
    "happy": ("glad", "cheerful", "joyful"),
    "sad": ("sorrowful", "unhappy", "gloomy"),
    "answered": ("responded", "replied"),
    "think": ("believe", "suppose"),
    "large": ("big", "great", "sizable"),
    "small": ("little", "tiny", "slight"),
    "very": ("really", "extremely", "quite"),
}
CONNECTORS = ("but", "and", "before", "after", "because", "said", "when", "while")


def extract_sentence(prompt: str) -> str:
    """The text after the first line-initial ``Sentence:``, else the whole prompt."""
    marker = "\nSentence:"
    idx = prompt.find(marker)
    return (prompt[idx + len(marker) :] if idx >= 0 else prompt).strip()


def paraphrase(sentence: str, seed: int) -> str:
    """Seeded synonym substitution followed by an optional clause swap
    around the first connector word; output is capitalized and terminated
    with a period, like a chat model's answer."""
    rng = seeded_rng(seed, sentence)
    words = sentence.split()
    out = []
    for w in words:
        core = w.lower().strip(".,;:!?\"'")
        alts = SYNONYMS.get(core)
        if alts and rng.random() < 0.7:
            out.append(rng.choice(alts))
        else:
            out.append(w)
    if len(out) >= 3 and rng.random() < 0.5:
        for k, w in enumerate(out[1:-1], 1):
            if w.lower() in CONNECTORS:
                out = out[k + 1 :] + [out[k]] + out[:k]
                break
    text = " ".join(out).strip().rstrip(".")
    return text[:1].upper() + text[1:] + "." if text else text


class MockLlm:
    """``identity`` echoes the sentence back; ``paraphrase`` applies
    :func:`paraphrase` keyed on (seed, sentence)."""

    MODES = ("identity", "paraphrase")

    def __init__(self, mode: str = "paraphrase", seed: int = 0):
        if mode not in self.MODES:
            raise ValueError(f"mode must be one of {self.MODES}")
        self.mode = mode
        self.seed = seed

    def complete(self, prompt: str) -> str:
        _check_prompt(prompt)
        with logged_call("llm", "complete", digest(prompt)):
            sentence = extract_sentence(prompt)
            if self.mode == "identity":
                return sentence
            return paraphrase(sentence, self.seed)
