"""Stage graph: score -> select -> rewrite -> synth -> filter -> mix -> stats/eval.

Each stage reads manifests, writes its outputs atomically into the work
directory, and leaves a completion record under ``.state/`` holding the
digests of its inputs, its config sections and its outputs. A stage whose
record still matches is skipped.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import clients
from .atomic import atomic_write_text
from .config import PipelineConfig
from .corpus import Corpus, iter_records, load_manifest, write_manifest, write_records
from .errors import ConfigError, MissingInput
from .evaluation import prompt_pairs, similarity_report, speaking_speed_delta, wer_report
from .hard_select import PromptSet, ScoredUtterance, score_corpus, select_hard_prompts, select_random_prompts
from .metrics import corpus_error_rate, normalize
from .mix_stats import mix, stats
from .rewrite import RewritePair, rewrite_corpus
from .synth_filter import SyntheticSample, assign_prompts, filter_synthetic, run_synthesis

logger = logging.getLogger(__name__)

STAGES = ("score", "select", "rewrite", "synth", "filter", "mix", "stats", "eval")


@dataclass(frozen=True)
class Workspace:
    root: Path

    def __getattr__(self, name: str) -> Path:
        try:
            return self.root / _FILES[name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def state_dir(self) -> Path:
        return self.root / ".state"


_FILES = {
    "scored": "scored.jsonl",
    "prompts": "prompts.jsonl",
    "rewrites": "rewrites.jsonl",
    "synth_dir": "synth",
    "posterior_dir": "posteriors",
    "synthetic": "synthetic.jsonl",
    "filtered": "filtered.jsonl",
    "mixed": "mixed.jsonl",
    "stats_json": "stats.json",
    "stats_csv": "stats_histogram.csv",
    "synth_quality": "synthetic_quality.json",
    "eval_json": "eval_report.json",
    "eval_csv": "eval_speakers.csv",
}


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass(frozen=True)
class Stage:
    name: str
    inputs: Callable[[PipelineConfig, Workspace], list[Path]]
    outputs: Callable[[PipelineConfig, Workspace], list[Path]]
    config_keys: tuple[str, ...]
    run: Callable[[PipelineConfig, Workspace], None]


def _scored(cfg, ws) -> list[ScoredUtterance]:
    return [ScoredUtterance.from_record(r) for _, r in iter_records(ws.scored)]


def _load_real(cfg: PipelineConfig) -> Corpus:
    return load_manifest(cfg.paths.real_manifest, name="real")


# -- stage bodies -----------------------------------------------------------


def run_score(cfg: PipelineConfig, ws: Workspace) -> None:
    real = _load_real(cfg)
    weak = clients.make_asr(cfg.clients.weak_asr, "weak", cfg.seed, ws.posterior_dir)
    scored = score_corpus(
        real,
        weak,
        cfg.norm.policy(),
        parallelism=cfg.parallelism,
        max_failure_fraction=cfg.max_failure_fraction,
    )
    rebased = {u.id: u for u in real.rebased(ws.root)}
    write_records(
        ws.scored,
        (ScoredUtterance(rebased[s.id], s.hypothesis, s.cer, s.error).to_record() for s in scored),
    )


def run_select(cfg: PipelineConfig, ws: Workspace) -> None:
    scored = _scored(cfg, ws)
    sel = cfg.selection
    if sel.strategy == "hard":
        prompts = select_hard_prompts(scored, sel.min_prompt_s, sel.budget_hours)
    else:
        prompts = select_random_prompts(scored, sel.min_prompt_s, sel.budget_hours, cfg.seed)
    logger.info(
        "selected %d prompts, %.2f h",
        len(prompts),
        prompts.total_duration_s / 3600,
        extra={"stage": "select"},
    )
    # Rank order is meaningful here, so records keep it instead of sorting by id.
    write_records(ws.prompts, (p.to_record() for p in prompts.prompts))


def run_rewrite(cfg: PipelineConfig, ws: Workspace) -> None:
    real = _load_real(cfg)
    policy = cfg.norm.policy()
    texts = [(u.id, u.transcript) for u in real]
    if cfg.rewrite.enabled:
        llm = clients.make_llm(cfg.clients.llm, cfg.seed)
        pairs = rewrite_corpus(
            texts,
            llm,
            policy,
            cfg.rewrite.filters(),
            parallelism=cfg.parallelism,
            max_failure_fraction=cfg.max_failure_fraction,
        )
    else:
        # No-rewrite variant: synthesize the original transcripts.
        pairs = [RewritePair(i, t, normalize(t, policy), "ok", "rewrite-disabled") for i, t in texts]
    write_records(ws.rewrites, (p.to_record() for p in pairs))


def _texts_for_synthesis(cfg: PipelineConfig, ws: Workspace) -> list[tuple[str, str]]:
    pairs = [RewritePair.from_record(r) for _, r in iter_records(ws.rewrites)]
    texts = [(p.id, p.rewritten) for p in pairs if p.ok]
    limit = cfg.synthesis.max_texts
    if limit is not None and limit < len(texts):
        picked = sorted(random.Random(cfg.synthesis_seed).sample(range(len(texts)), limit))
        texts = [texts[i] for i in picked]
    return texts


def run_synth(cfg: PipelineConfig, ws: Workspace) -> None:
    prompt_records = [r for _, r in iter_records(ws.prompts)]
    texts = _texts_for_synthesis(cfg, ws)
    if not prompt_records or not texts:
        logger.warning("nothing to synthesize (%d prompts, %d texts)", len(prompt_records), len(texts), extra={"stage": "synth"})
        write_records(ws.synthetic, [])
        return
    prompts = PromptSet(
        tuple(ScoredUtterance.from_record(r) for r in prompt_records),
        cfg.selection.budget_hours,
        cfg.selection.min_prompt_s,
        cfg.selection.strategy,
    )
    jobs = assign_prompts(texts, prompts, cfg.synthesis.pairing, cfg.synthesis_seed)
    tts = clients.make_tts(cfg.clients.tts, cfg.selection.min_prompt_s)
    prompt_corpus = Corpus(tuple(p.utterance for p in prompts.prompts), "prompts", ws.root)
    utts, _ = run_synthesis(
        jobs,
        tts,
        ws.synth_dir,
        prompt_corpus,
        parallelism=cfg.parallelism,
        max_failure_fraction=cfg.max_failure_fraction,
        audio_ref_base=ws.root,
    )
    write_manifest(Corpus(tuple(utts), "synthetic"), ws.synthetic)


def run_filter(cfg: PipelineConfig, ws: Workspace) -> None:
    synthetic = load_manifest(ws.synthetic, name="synthetic")
    strong = clients.make_asr(cfg.clients.strong_asr, "strong", cfg.seed)
    samples = filter_synthetic(
        synthetic,
        strong,
        cfg.filter.gamma,
        cfg.norm.policy(),
        parallelism=cfg.parallelism,
        max_failure_fraction=cfg.max_failure_fraction,
    )
    kept = sum(s.kept for s in samples)
    logger.info("kept %d of %d synthetic samples", kept, len(samples), extra={"stage": "filter"})
    write_records(ws.filtered, (s.to_record() for s in samples))


def _kept_corpus(ws: Workspace) -> Corpus:
    samples = [SyntheticSample.from_record(r) for _, r in iter_records(ws.filtered)]
    return Corpus(tuple(s.utterance for s in samples if s.kept), "synthetic", ws.root)


def run_mix(cfg: PipelineConfig, ws: Workspace) -> None:
    real = _load_real(cfg).rebased(ws.root)
    mixed = mix(real, _kept_corpus(ws))
    write_manifest(mixed, ws.mixed)


def run_stats(cfg: PipelineConfig, ws: Workspace) -> None:
    report = stats(_kept_corpus(ws), _load_real(cfg), cfg.norm.policy())
    atomic_write_text(ws.stats_json, report.to_json())
    atomic_write_text(ws.stats_csv, report.histogram_csv())


def run_eval(cfg: PipelineConfig, ws: Workspace) -> None:
    policy = cfg.norm.policy()
    samples = [SyntheticSample.from_record(r) for _, r in iter_records(ws.filtered)]
    prompts = Corpus(tuple(ScoredUtterance.from_record(r).utterance for _, r in iter_records(ws.prompts)), "prompts", ws.root)
    quality: dict = {"n_samples": len(samples), "n_kept": sum(s.kept for s in samples)}
    if samples:
        quality["wer"] = corpus_error_rate(
            [(s.utterance.transcript, s.strong_hypothesis) for s in samples], "word", policy
        )
        kept = Corpus(tuple(s.utterance for s in samples if s.kept), "kept", ws.root)
        if len(kept):
            pairs = prompt_pairs(kept, prompts)
            quality["delta_speed"] = speaking_speed_delta(pairs, policy)
            if cfg.clients.scorer is not None:
                scorer = clients.make_scorer(cfg.clients.scorer)
                sim = similarity_report(
                    [(str(kept.audio_path(g)), str(prompts.audio_path(p))) for g, p in pairs],
                    scorer,
                    parallelism=cfg.parallelism,
                    max_failure_fraction=cfg.max_failure_fraction,
                )
                quality["sim_spk"] = sim.mean_sim_spk
                quality["mos"] = sim.mean_mos
    atomic_write_text(ws.synth_quality, json.dumps(quality, indent=2, sort_keys=True) + "\n")

    if cfg.paths.eval_manifest:
        test = load_manifest(cfg.paths.eval_manifest, name="eval")
        if cfg.paths.eval_hypotheses:
            hyps = {r["id"]: r["text"] for _, r in iter_records(cfg.paths.eval_hypotheses)}
            missing = [u.id for u in test if u.id not in hyps]
            if missing:
                raise MissingInput(f"no hypothesis for {len(missing)} eval utterances, e.g. {missing[0]!r}")
        else:
            strong = clients.make_asr(cfg.clients.strong_asr, "strong", cfg.seed)
            hyps = {u.id: strong.transcribe(test.audio_path(u), key=u.id).resolve() for u in test}
        report = wer_report([(u, hyps[u.id]) for u in test], policy)
        atomic_write_text(ws.eval_json, report.to_json())
        atomic_write_text(ws.eval_csv, report.speakers_csv())


def _opt(*paths: str | None) -> list[Path]:
    return [Path(p) for p in paths if p]


STAGE_TABLE: dict[str, Stage] = {
    s.name: s
    for s in [
        Stage(
            "score",
            lambda c, w: [Path(c.paths.real_manifest)],
            lambda c, w: [w.scored],
            ("norm", "clients.weak_asr", "seed"),
            run_score,
        ),
        Stage("select", lambda c, w: [w.scored], lambda c, w: [w.prompts], ("selection", "seed"), run_select),
        Stage(
            "rewrite",
            lambda c, w: [Path(c.paths.real_manifest)],
            lambda c, w: [w.rewrites],
            ("rewrite", "norm", "clients.llm", "seed"),
            run_rewrite,
        ),
        Stage(
            "synth",
            lambda c, w: [w.prompts, w.rewrites],
            lambda c, w: [w.synthetic],
            ("synthesis", "selection.min_prompt_s", "clients.tts", "seed"),
            run_synth,
        ),
        Stage(
            "filter",
            lambda c, w: [w.synthetic],
            lambda c, w: [w.filtered],
            ("filter", "norm", "clients.strong_asr", "seed"),
            run_filter,
        ),
        Stage(
            "mix",
            lambda c, w: [Path(c.paths.real_manifest), w.filtered],
            lambda c, w: [w.mixed],
            (),
            run_mix,
        ),
        Stage(
            "stats",
            lambda c, w: [Path(c.paths.real_manifest), w.filtered],
            lambda c, w: [w.stats_json, w.stats_csv],
            ("norm",),
            run_stats,
        ),
        Stage(
            "eval",
            lambda c, w: [w.filtered, w.prompts] + _opt(c.paths.eval_manifest, c.paths.eval_hypotheses),
            lambda c, w: [w.synth_quality] + ([w.eval_json, w.eval_csv] if c.paths.eval_manifest else []),
            ("norm", "clients.scorer", "clients.strong_asr", "seed"),
            run_eval,
        ),
    ]
}


def _record_path(ws: Workspace, stage: str) -> Path:
    return ws.state_dir / f"{stage}.json"


def _expected_record(stage: Stage, cfg: PipelineConfig, ws: Workspace) -> dict:
    return {
        "stage": stage.name,
        "config": cfg.section_digest(*stage.config_keys) if stage.config_keys else "",
        "inputs": {str(p): file_digest(p) for p in stage.inputs(cfg, ws)},
    }


def is_complete(stage: Stage, cfg: PipelineConfig, ws: Workspace) -> bool:
    rec_path = _record_path(ws, stage.name)
    if not rec_path.is_file():
        return False
    try:
        rec = json.loads(rec_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return False
    expected = _expected_record(stage, cfg, ws)
    if any(rec.get(k) != v for k, v in expected.items()):
        return False
    outputs = rec.get("outputs", {})
    for p in stage.outputs(cfg, ws):
        if not p.is_file() or outputs.get(str(p)) != file_digest(p):
            return False
    return True


def run_stage(name: str, cfg: PipelineConfig, *, force: bool = False) -> bool:
    """Run one stage. Returns False when it was skipped as already complete."""
    stage = STAGE_TABLE[name]
    ws = Workspace(Path(cfg.paths.work_dir))
    if not Path(cfg.paths.real_manifest).is_file():
        raise ConfigError([("paths.real_manifest", f"file not found: {cfg.paths.real_manifest}")])
    missing = [str(p) for p in stage.inputs(cfg, ws) if not p.is_file()]
    if missing:
        raise MissingInput(f"stage {name!r} is missing inputs: {', '.join(missing)}")
    ws.root.mkdir(parents=True, exist_ok=True)
    if not force and is_complete(stage, cfg, ws):
        logger.info("stage %s up to date, skipping", name, extra={"stage": name, "event": "skip"})
        return False
    rec_path = _record_path(ws, name)
    rec_path.unlink(missing_ok=True)
    expected = _expected_record(stage, cfg, ws)
    logger.info("stage %s starting", name, extra={"stage": name, "event": "start"})
    stage.run(cfg, ws)
    expected["outputs"] = {str(p): file_digest(p) for p in stage.outputs(cfg, ws)}
    ws.state_dir.mkdir(exist_ok=True)
    atomic_write_text(rec_path, json.dumps(expected, indent=2, sort_keys=True) + "\n")
    logger.info("stage %s done", name, extra={"stage": name, "event": "done"})
    return True


def run_pipeline(cfg: PipelineConfig, *, force: bool = False) -> dict[str, bool]:
    return {name: run_stage(name, cfg, force=force) for name in STAGES}
