"""Adapters for the external models the pipeline drives.

Every client comes in two flavours: a remote one speaking the JSON
envelope over HTTP or a subprocess, and a deterministic mock used for
tests and dry runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .asr import AsrClient, MockAsr, RemoteAsr, Transcription
from .llm import LlmClient, MockLlm, RemoteLlm
from .scorer import MockScorer, RemoteScorer, ScorerClient
from .transport import HttpTransport, SubprocessTransport, Transport, with_retry
from .tts import MockTts, RemoteTts, TtsClient

TRANSPORTS = ("mock", "http", "subprocess")

__all__ = [
    "AsrClient",
    "ClientConfig",
    "HttpTransport",
    "LlmClient",
    "MockAsr",
    "MockLlm",
    "MockScorer",
    "MockTts",
    "RemoteAsr",
    "RemoteLlm",
    "RemoteScorer",
    "RemoteTts",
    "ScorerClient",
    "SubprocessTransport",
    "Transcription",
    "TtsClient",
    "make_asr",
    "make_llm",
    "make_scorer",
    "make_tts",
    "with_retry",
]


@dataclass
class ClientConfig:
    transport: str = "mock"
    endpoint: str | None = None
    command: list[str] | None = None
    timeout_s: float = 60.0
    retries: int = 3
    # Mock-only knobs (seed, sensitivity, mode, dim, emit_posteriors, ...).
    options: dict[str, Any] = field(default_factory=dict)

    def build_transport(self) -> Transport:
        if self.transport == "http":
            if not self.endpoint:
                raise ValueError("http transport needs an endpoint")
            return HttpTransport(self.endpoint, self.timeout_s)
        if self.transport == "subprocess":
            if not self.command:
                raise ValueError("subprocess transport needs a command")
            return SubprocessTransport(self.command, self.timeout_s)
        raise ValueError(f"transport {self.transport!r} has no wire transport")


def make_asr(cfg: ClientConfig, role: str, seed: int = 0, posterior_dir: str | Path | None = None) -> AsrClient:
    if cfg.transport == "mock":
        opts = cfg.options
        return MockAsr(
            role=role,
            seed=int(opts.get("seed", seed)),
            sensitivity=opts.get("sensitivity"),
            posterior_dir=posterior_dir if opts.get("emit_posteriors") else None,
        )
    return RemoteAsr(role, cfg.build_transport(), retries=cfg.retries)


def make_llm(cfg: ClientConfig, seed: int = 0) -> LlmClient:
    if cfg.transport == "mock":
        return MockLlm(mode=cfg.options.get("mode", "paraphrase"), seed=int(cfg.options.get("seed", seed)))
    return RemoteLlm(cfg.build_transport(), retries=cfg.retries)


def make_tts(cfg: ClientConfig, min_prompt_s: float) -> TtsClient:
    if cfg.transport == "mock":
        return MockTts(min_prompt_s=min_prompt_s)
    return RemoteTts(cfg.build_transport(), min_prompt_s=min_prompt_s, retries=cfg.retries)


def make_scorer(cfg: ClientConfig) -> ScorerClient:
    if cfg.transport == "mock":
        return MockScorer(dim=int(cfg.options.get("dim", 16)), mos_value=float(cfg.options.get("mos", 3.0)))
    return RemoteScorer(cfg.build_transport(), retries=cfg.retries)
