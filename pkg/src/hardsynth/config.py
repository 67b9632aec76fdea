"""Pipeline configuration: YAML in, validated dataclasses out.

Every problem is reported with its dotted key path. Unknown keys are
rejected, with a suggestion when one is close to a known key.
"""

from __future__ import annotations

import copy
import dataclasses
import difflib
import hashlib
import json
import os
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import yaml

from .clients import TRANSPORTS, ClientConfig
from .errors import ConfigError
from .metrics import NormPolicy
from .rewrite import RewriteFilters

ENV_PREFIX = "HARDSYNTH_"
CLIENT_NAMES = ("weak_asr", "strong_asr", "llm", "tts", "scorer")


@dataclass
class PathsConfig:
    real_manifest: str
    work_dir: str
    eval_manifest: str | None = None
    eval_hypotheses: str | None = None


@dataclass
class NormConfig:
    lowercase: bool = True
    strip_punct: bool = True
    collapse_whitespace: bool = True

    def policy(self) -> NormPolicy:
        return NormPolicy(self.lowercase, self.strip_punct, self.collapse_whitespace)


@dataclass
class SelectionConfig:
    budget_hours: float = 20.0
    min_prompt_s: float = 3.0
    strategy: Literal["hard", "random"] = "hard"


@dataclass
class RewriteConfig:
    enabled: bool = True
    reject_identical: bool = True
    min_length_ratio: float = 0.3
    max_length_ratio: float = 3.0

    def filters(self) -> RewriteFilters:
        return RewriteFilters(self.reject_identical, self.min_length_ratio, self.max_length_ratio)


@dataclass
class SynthesisConfig:
    pairing: Literal["uniform_random", "round_robin"] = "uniform_random"
    seed: int | None = None
    max_texts: int | None = None


@dataclass
class FilterConfig:
    gamma: float = 0.10


@dataclass
class ClientsConfig:
    weak_asr: ClientConfig = field(default_factory=ClientConfig)
    strong_asr: ClientConfig = field(default_factory=ClientConfig)
    llm: ClientConfig = field(default_factory=ClientConfig)
    tts: ClientConfig = field(default_factory=ClientConfig)
    scorer: ClientConfig | None = field(default_factory=ClientConfig)


@dataclass
class PipelineConfig:
    paths: PathsConfig
    norm: NormConfig = field(default_factory=NormConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    rewrite: RewriteConfig = field(default_factory=RewriteConfig)
    synthesis: SynthesisConfig = field(default_factory=SynthesisConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    clients: ClientsConfig = field(default_factory=ClientsConfig)
    parallelism: int = 1
    seed: int = 0
    max_failure_fraction: float = 0.01

    @property
    def synthesis_seed(self) -> int:
        return self.seed if self.synthesis.seed is None else self.synthesis.seed

    def section_digest(self, *keys: str) -> str:
        """Stable digest of the named dotted sections, for stage records."""
        d = dataclasses.asdict(self)
        picked = {}
        for key in keys:
            node: Any = d
            for part in key.split("."):
                node = node[part] if node is not None else None
            picked[key] = node
        blob = json.dumps(picked, sort_keys=True, default=str).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


# Invariants checked after type coercion: key path -> (predicate, message).
_CHECKS: dict[str, tuple[typing.Callable[[Any], bool], str]] = {
    "selection.budget_hours": (lambda v: v > 0, "must be > 0"),
    "selection.min_prompt_s": (lambda v: v >= 0, "must be >= 0"),
    "filter.gamma": (lambda v: v >= 0, "must be >= 0"),
    "parallelism": (lambda v: v >= 1, "must be >= 1"),
    "max_failure_fraction": (lambda v: 0 <= v <= 1, "must be within [0, 1]"),
    "rewrite.min_length_ratio": (lambda v: v >= 0, "must be >= 0"),
    "synthesis.max_texts": (lambda v: v is None or v >= 1, "must be >= 1 when set"),
}


def _is_optional(tp) -> tuple[bool, Any]:
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return True, args[0]
    return False, tp


def _coerce(value: Any, tp: Any, key: str, problems: list[tuple[str, str]]) -> Any:
    optional, tp = _is_optional(tp)
    if value is None:
        if optional:
            return None
        problems.append((key, "must not be null"))
        return None
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, key, problems)
    origin = typing.get_origin(tp)
    if origin is Literal:
        allowed = typing.get_args(tp)
        if value not in allowed:
            problems.append((key, f"must be one of {', '.join(map(str, allowed))}, got {value!r}"))
        return value
    if tp is bool:
        if not isinstance(value, bool):
            problems.append((key, f"must be true or false, got {value!r}"))
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            problems.append((key, f"must be an integer, got {value!r}"))
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append((key, f"must be a number, got {value!r}"))
            return value
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            problems.append((key, f"must be a string, got {value!r}"))
        return value
    if origin is list:
        if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
            problems.append((key, "must be a list of strings"))
        return value
    if origin is dict:
        if not isinstance(value, dict):
            problems.append((key, "must be a mapping"))
        return value
    raise TypeError(f"unsupported config type {tp!r}")  # pragma: no cover


def _build(cls, data: Any, prefix: str, problems: list[tuple[str, str]]):
    where = prefix or "<root>"
    if not isinstance(data, dict):
        problems.append((where, "must be a mapping"))
        return None
    hints = typing.get_type_hints(cls)
    known = [f.name for f in dataclasses.fields(cls)]
    for key in data:
        if key not in known:
            hint = difflib.get_close_matches(str(key), known, n=1, cutoff=0.6)
            msg = "unknown key" + (f" (did you mean {_join(prefix, hint[0])!r}?)" if hint else "")
            problems.append((_join(prefix, str(key)), msg))
    kwargs = {}
    for f in dataclasses.fields(cls):
        key = _join(prefix, f.name)
        if f.name in data:
            kwargs[f.name] = _coerce(data[f.name], hints[f.name], key, problems)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            problems.append((key, "required key is missing"))
    try:
        return cls(**kwargs)
    except TypeError:
        return None


def _join(prefix: str, key: str) -> str:
    return f"{prefix}.{key}" if prefix else key


def _check_invariants(cfg: PipelineConfig, problems: list[tuple[str, str]]) -> None:
    for key, (pred, msg) in _CHECKS.items():
        node: Any = cfg
        for part in key.split("."):
            node = getattr(node, part)
        if isinstance(node, (int, float)) or node is None:
            try:
                ok = pred(node)
            except TypeError:
                continue
            if not ok:
                problems.append((key, f"{msg}, got {node!r}"))
    if cfg.rewrite.max_length_ratio < cfg.rewrite.min_length_ratio:
        problems.append(("rewrite.max_length_ratio", "must be >= rewrite.min_length_ratio"))
    for name in CLIENT_NAMES:
        c = getattr(cfg.clients, name)
        if c is None:
            if name != "scorer":
                problems.append((f"clients.{name}", "must not be null"))
            continue
        key = f"clients.{name}"
        if c.transport not in TRANSPORTS:
            problems.append((f"{key}.transport", f"must be one of {', '.join(TRANSPORTS)}, got {c.transport!r}"))
        elif c.transport == "http" and not c.endpoint:
            problems.append((f"{key}.endpoint", "required for http transport"))
        elif c.transport == "subprocess" and not c.command:
            problems.append((f"{key}.command", "required for subprocess transport"))
        if isinstance(c.retries, int) and c.retries < 1:
            problems.append((f"{key}.retries", "must be >= 1"))


def set_path(raw: dict, dotted: str, value: Any) -> None:
    node = raw
    parts = dotted.split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def apply_env(raw: dict, environ: typing.Mapping[str, str] = os.environ) -> None:
    """``HARDSYNTH_<CLIENT>_ENDPOINT`` overrides a client's endpoint."""
    for name in CLIENT_NAMES:
        value = environ.get(f"{ENV_PREFIX}{name.upper()}_ENDPOINT")
        if value:
            set_path(raw, f"clients.{name}.endpoint", value)


def from_dict(raw: dict) -> PipelineConfig:
    problems: list[tuple[str, str]] = []
    cfg = _build(PipelineConfig, raw, "", problems)
    if cfg is not None and not problems:
        _check_invariants(cfg, problems)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_raw(path: str | os.PathLike) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([("<file>", f"cannot read {path}: {exc.strerror}")]) from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([("<file>", f"not valid YAML: {exc}")]) from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError([("<root>", "must be a mapping")])
    return raw


def validate_config(
    path: str | os.PathLike,
    overrides: dict[str, Any] | None = None,
    environ: typing.Mapping[str, str] = os.environ,
) -> PipelineConfig:
    """Load, apply env and dotted-key overrides, check, fill defaults.

    Relative paths in the file resolve against the file's directory;
    override paths are taken as given.
    """
    raw = copy.deepcopy(load_raw(path))
    apply_env(raw, environ)
    base = Path(path).resolve().parent
    cfg_paths = raw.get("paths") if isinstance(raw.get("paths"), dict) else {}
    for key in ("real_manifest", "work_dir", "eval_manifest", "eval_hypotheses"):
        v = cfg_paths.get(key)
        if isinstance(v, str) and not os.path.isabs(v):
            cfg_paths[key] = os.path.normpath(os.path.join(base, v))
    for dotted, value in (overrides or {}).items():
        if value is not None:
            set_path(raw, dotted, os.path.abspath(value) if dotted.startswith("paths.") else value)
    return from_dict(raw)
