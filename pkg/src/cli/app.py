# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

"""
Command-line front end.

Subcommands print machine-readable output (CSV or a plain report) on stdout
and log to stderr. Exit codes: 0 success, 1 invalid input, 2 runtime
failure, 3 acceptance check not met.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
import yaml

from src.bench import BenchMode, BenchSpec, run_bench
from src.config import RunConfig, default_output_root, load_run_config
from src.errors import (
    CheckpointError,
    ConfigError,
    ModelTooLargeError,
    TokenRangeError,
    UnsupportedConfigError,
    VocabMismatchError,
)
from src.model import (
    alpha_diversity,
    build_model,
    load_checkpoint,
    param_count,
    save_checkpoint,
)
from src.multipath import ABLATION_PRESETS, ExecutionMode, shutdown_executor
from src.training import (
    SCHEDULE_PRESETS,
    RecordWriter,
    comparison_configs,
    depth_path_grid,
    grad_check_model,
    run_comparison,
    schedule_preset,
    train,
)
from src.utils.decorators import log_io

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_ACCEPTANCE = 3

VALIDATION_ERRORS = (
    ConfigError,
    UnsupportedConfigError,
    ModelTooLargeError,
    VocabMismatchError,
    CheckpointError,
    TokenRangeError,
)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level: str) -> None:
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level '{level}'")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(numeric)


def _load(args: argparse.Namespace, **extra: Any) -> RunConfig:
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["model.seed"] = args.seed
        overrides["task.seed"] = args.seed
    if getattr(args, "ablation", None):
        overrides["ablation"] = args.ablation
    overrides.update({k: v for k, v in extra.items() if v is not None})
    cfg = load_run_config(args.config, overrides)
    if getattr(args, "preset", None):
        model = cfg.require_model()
        cfg = cfg.model_copy(
            update={"schedule": schedule_preset(args.preset, model.d_model)}
        )
    return cfg


def _run_dir(args: argparse.Namespace, cfg: Optional[RunConfig], name: str) -> Path:
    if args.out:
        path = Path(args.out)
    elif cfg is not None:
        path = cfg.resolved_output_dir(name)
    else:
        path = default_output_root() / name
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory is not writable: {path}")
    return path


@log_io
def cmd_params(args: argparse.Namespace) -> int:
    cfg = _load(args)
    breakdown = param_count(cfg.require_model())
    frame = pd.DataFrame(
        breakdown.rows() + [("total", breakdown.total)], columns=["group", "params"]
    )
    sys.stdout.write(frame.to_csv(index=False, lineterminator="\n"))
    logger.info(
        f"{breakdown.total} parameters, norms+fusion overhead "
        f"{100 * breakdown.overhead_fraction():.4f}%"
    )
    return EXIT_OK


@log_io
def cmd_gradcheck(args: argparse.Namespace) -> int:
    cfg = _load(args)
    report = grad_check_model(
        cfg.require_model(), tol=args.tol, max_params=args.max_params
    )
    sys.stdout.write(report.to_text() + "\n")
    if not report.passed:
        logger.error(f"Gradient check failed: {', '.join(report.failing_groups())}")
        return EXIT_ACCEPTANCE
    return EXIT_OK


@log_io
def cmd_train(args: argparse.Namespace) -> int:
    cfg = _load(
        args,
        **{"train.mode": args.mode, "train.steps": args.steps},
    )
    model_cfg = cfg.require_model()
    run_dir = _run_dir(args, cfg, "train")
    with open(run_dir / "config.yaml", "w", encoding="utf-8") as f:
        yaml.safe_dump(cfg.model_dump(mode="json"), f, sort_keys=False)

    model = build_model(model_cfg)
    tc = cfg.train
    last = None
    with RecordWriter(run_dir / "metrics.jsonl") as writer:
        for last in train(
            model,
            cfg.task,
            cfg.schedule,
            steps=tc.steps,
            batch=tc.batch,
            log_every=tc.log_every,
            clip_norm=tc.clip_norm,
            mode=tc.mode,
            timing=tc.timing,
        ):
            writer.write(last)
    save_checkpoint(model, run_dir / "checkpoint.json", step=tc.steps)
    logger.info(f"Run written to {run_dir}")

    if tc.target_accuracy is not None:
        final_acc = last.acc if last is not None else 0.0
        if final_acc < tc.target_accuracy:
            logger.error(
                f"Final accuracy {final_acc:.4f} below target {tc.target_accuracy}"
            )
            return EXIT_ACCEPTANCE
    return EXIT_OK


@log_io
def cmd_diversity(args: argparse.Namespace) -> int:
    model = load_checkpoint(args.checkpoint)
    sys.stdout.write(alpha_diversity(model).to_csv())
    return EXIT_OK


@log_io
def cmd_bench(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config) if args.config else None
    spec = cfg.bench if cfg is not None and cfg.bench is not None else BenchSpec()
    if args.seed is not None:
        spec = spec.model_copy(update={"seed": args.seed})
    if args.mode:
        spec = spec.model_copy(update={"mode": BenchMode(args.mode)})
    result = run_bench(spec)
    text = result.to_csv()
    (_run_dir(args, cfg, "bench") / "bench.csv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


@log_io
def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _load(args, **{"train.steps": args.steps})
    model = cfg.require_model()
    variants = depth_path_grid(model) if args.grid else comparison_configs(model)
    result = run_comparison(variants, cfg.task, cfg.schedule, cfg.train)
    text = result.to_csv()
    (_run_dir(args, cfg, "compare") / "compare.csv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="YAML run config")
    common.add_argument("--seed", type=int, help="Override model and task seeds")
    common.add_argument("--out", type=str, help="Output directory")
    common.add_argument(
        "--log-level",
        type=str,
        default=os.getenv("MULTIPATH_LOG_LEVEL", "info"),
        choices=["debug", "info", "warning", "error", "critical"],
        help="Log level (default: info, or $MULTIPATH_LOG_LEVEL)",
    )
    common.add_argument("--debug", action="store_true", help="Enable debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="multipath",
        description="Multi-path Transformer toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    params = sub.add_parser(
        "params", parents=[common], help="Print the parameter count breakdown"
    )
    params.add_argument(
        "--ablation", choices=list(ABLATION_PRESETS), help="Named ablation row"
    )
    params.set_defaults(handler=cmd_params, needs_config=True)

    gradcheck = sub.add_parser(
        "gradcheck", parents=[common], help="Finite-difference gradient check"
    )
    gradcheck.add_argument(
        "--tol", type=float, default=1e-4, help="Relative error tolerance"
    )
    gradcheck.add_argument(
        "--max-params",
        type=int,
        default=5000,
        help="Refuse models larger than this (default: 5000)",
    )
    gradcheck.set_defaults(handler=cmd_gradcheck, needs_config=True)

    train_p = sub.add_parser("train", parents=[common], help="Train on a toy task")
    train_p.add_argument(
        "--preset", choices=list(SCHEDULE_PRESETS), help="Learning-rate schedule preset"
    )
    train_p.add_argument(
        "--mode", choices=[m.value for m in ExecutionMode], help="Path execution mode"
    )
    train_p.add_argument("--steps", type=int, help="Override train.steps")
    train_p.add_argument(
        "--ablation", choices=list(ABLATION_PRESETS), help="Named ablation row"
    )
    train_p.set_defaults(handler=cmd_train, needs_config=True)

    diversity = sub.add_parser(
        "diversity", parents=[common], help="Alpha diversity CSV of a checkpoint"
    )
    diversity.add_argument("checkpoint", type=str, help="Checkpoint JSON file")
    diversity.set_defaults(handler=cmd_diversity, needs_config=False)

    bench = sub.add_parser("bench", parents=[common], help="Path-count benchmark")
    bench.add_argument(
        "--mode", choices=[m.value for m in BenchMode], help="Execution modes to time"
    )
    bench.set_defaults(handler=cmd_bench, needs_config=False)

    compare = sub.add_parser(
        "compare", parents=[common], help="Fixed-budget variant comparison"
    )
    compare.add_argument(
        "--preset", choices=list(SCHEDULE_PRESETS), help="Learning-rate schedule preset"
    )
    compare.add_argument("--steps", type=int, help="Override train.steps")
    compare.add_argument(
        "--grid",
        action="store_true",
        help="Compare depth x paths splits of the same path budget instead",
    )
    compare.set_defaults(handler=cmd_compare, needs_config=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_VALIDATION

    setup_logging("debug" if args.debug else args.log_level)
    handler: Callable[[argparse.Namespace], int] = args.handler
    if args.needs_config and not args.config:
        logger.error(f"'{args.command}' needs --config")
        return EXIT_VALIDATION
    try:
        return handler(args)
    except VALIDATION_ERRORS as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        logger.exception(f"'{args.command}' failed: {e}")
        return EXIT_RUNTIME
    finally:
        shutdown_executor()
