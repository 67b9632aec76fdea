"""Command-line entry point: one subcommand per stage plus ``pipeline``.

Exit codes: 0 success, 2 configuration error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import __version__
from .config import validate_config
from .errors import ConfigError, HardSynthError
from .pipeline import STAGES, run_pipeline, run_stage

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3

logger = logging.getLogger("hardsynth")

_EXTRA_FIELDS = ("stage", "event", "utt_id", "client", "op", "input_digest", "status", "latency_ms")


class JsonLineFormatter(logging.Formatter):
    """One JSON object per record, carrying the structured extras."""

    def format(self, record: logging.LogRecord) -> str:
        out = {
            "ts": round(record.created, 3),
            "level": record.levelname.lower(),
            "logger": record.name,
            "msg": record.getMessage(),
        }
        for key in _EXTRA_FIELDS:
            if hasattr(record, key):
                out[key] = getattr(record, key)
        if record.exc_info:
            out["exc"] = self.formatException(record.exc_info)
        return json.dumps(out, ensure_ascii=False, default=str)


def setup_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLineFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level.upper())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="pipeline config (YAML)")
    common.add_argument("--work-dir", help="override paths.work_dir")
    common.add_argument("--seed", type=int)
    common.add_argument("--parallelism", type=int)
    common.add_argument("--budget-hours", type=float, help="prompt budget in hours")
    common.add_argument("--min-prompt-s", type=float, help="minimum prompt duration in seconds")
    common.add_argument("--gamma", type=float, help="CER threshold for keeping synthetic samples")
    common.add_argument("--prompt-strategy", choices=("hard", "random"))
    common.add_argument("--no-rewrite", action="store_true", help="synthesize the original transcripts")
    common.add_argument("--force", action="store_true", help="rerun even if the stage is up to date")
    common.add_argument("--log-level", default="info", choices=("debug", "info", "warning", "error"))

    parser = argparse.ArgumentParser(prog="hardsynth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in STAGES:
        sub.add_parser(name, parents=[common], help=f"run the {name} stage")
    sub.add_parser("pipeline", parents=[common], help="run every stage in order")
    return parser


def overrides_from(args: argparse.Namespace) -> dict:
    out = {
        "paths.work_dir": args.work_dir,
        "seed": args.seed,
        "parallelism": args.parallelism,
        "selection.budget_hours": args.budget_hours,
        "selection.min_prompt_s": args.min_prompt_s,
        "selection.strategy": args.prompt_strategy,
        "filter.gamma": args.gamma,
    }
    if args.no_rewrite:
        out["rewrite.enabled"] = False
    return out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        cfg = validate_config(args.config, overrides_from(args))
    except ConfigError as exc:
        print(f"hardsynth: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        if args.command == "pipeline":
            run_pipeline(cfg, force=args.force)
        else:
            run_stage(args.command, cfg, force=args.force)
    except ConfigError as exc:
        print(f"hardsynth: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HardSynthError, OSError, ValueError, KeyError) as exc:
        logger.error("%s failed: %s", args.command, exc, extra={"stage": args.command, "event": "failed"})
        print(f"hardsynth: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE
    logger.info(
        "%s finished in %.2fs",
        args.command,
        time.perf_counter() - t0,
        extra={"stage": args.command, "event": "finished"},
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
