# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import io
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.autodiff import Tape, argmax_rows, backward, cross_entropy
from src.errors import VocabMismatchError
from src.model import Model, ModelConfig, build_model
from src.multipath import ExecutionMode, ablation_preset

from .optimizer import OptimizerState, adam_step, clip_grad_norm
from .records import RunRecord
from .schedule import ScheduleConfig, learning_rate
from .tasks import Batch, TaskSpec, iterate_batches

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    steps: int = Field(5000, ge=0, description="Optimizer steps")
    batch: int = Field(32, ge=1, description="Sequences per batch")
    log_every: int = Field(100, ge=1, description="Steps per emitted record")
    clip_norm: Optional[float] = Field(
        None, gt=0, description="Global L2 gradient clipping; off when unset"
    )
    target_accuracy: Optional[float] = Field(
        None,
        gt=0.0,
        le=1.0,
        description="Acceptance threshold on the final record's accuracy",
    )
    timing: bool = Field(
        True, description="Record wall_ms; false writes 0 for byte-stable metrics"
    )
    mode: ExecutionMode = Field(
        ExecutionMode.SEQUENTIAL, description="How paths of a sublayer are run"
    )


@dataclass
class _Interval:
    loss_sum: float = 0.0
    steps: int = 0
    correct: int = 0
    tokens: int = 0
    started: float = field(default_factory=time.perf_counter)

    def add(self, loss: float, correct: int, tokens: int) -> None:
        self.loss_sum += loss
        self.steps += 1
        self.correct += correct
        self.tokens += tokens


def train_step(
    model: Model,
    batch: Batch,
    st: OptimizerState,
    lr: float,
    clip_norm: Optional[float] = None,
    mode: ExecutionMode = ExecutionMode.SEQUENTIAL,
) -> Tuple[float, int, int]:
    """One teacher-forced update; returns (loss, correct tokens, scored tokens)."""
    params = model.named_parameters()
    model.zero_grad()
    with Tape():
        logits = model.forward_batch(
            batch.srcs, None if model.cfg.encoder_only else batch.tgt_in, mode=mode
        )
        loss = cross_entropy(logits, batch.tgt_out)
        backward(loss)
    correct = int((argmax_rows(logits) == batch.tgt_out).sum())
    if clip_norm is not None:
        clip_grad_norm(params, clip_norm)
    adam_step(params, None, st, lr)
    return loss.item(), correct, int(batch.tgt_out.size)


def train(
    model: Model,
    task: TaskSpec,
    sched: ScheduleConfig,
    steps: int,
    batch: int,
    log_every: int = 100,
    clip_norm: Optional[float] = None,
    mode: ExecutionMode = ExecutionMode.SEQUENTIAL,
    timing: bool = True,
    state: Optional[OptimizerState] = None,
) -> Iterator[RunRecord]:
    """
    Train ``model`` in place and stream one record per logging interval.

    The vocabulary check runs eagerly; the returned iterator drives the
    optimization, so nothing is trained until it is consumed. The last
    interval may be shorter than ``log_every``.

    Raises:
        VocabMismatchError: ``task.vocab`` differs from the model vocabulary.
    """
    if task.vocab != model.cfg.vocab_size:
        raise VocabMismatchError(
            f"task vocab {task.vocab} != model vocab {model.cfg.vocab_size}"
        )
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if log_every < 1:
        raise ValueError(f"log_every must be >= 1, got {log_every}")
    st = state if state is not None else OptimizerState()
    return _train_loop(
        model, task, sched, steps, batch, log_every, clip_norm, mode, timing, st
    )


def _train_loop(
    model: Model,
    task: TaskSpec,
    sched: ScheduleConfig,
    steps: int,
    batch: int,
    log_every: int,
    clip_norm: Optional[float],
    mode: ExecutionMode,
    timing: bool,
    st: OptimizerState,
) -> Iterator[RunRecord]:
    if steps == 0:
        return
    batches = iterate_batches(task, batch, encoder_only=model.cfg.encoder_only)
    interval = _Interval()
    first_step = st.step + 1
    for step in range(first_step, first_step + steps):
        lr = learning_rate(step, sched)
        loss, correct, tokens = train_step(
            model, next(batches), st, lr, clip_norm=clip_norm, mode=mode
        )
        interval.add(loss, correct, tokens)
        last = step == first_step + steps - 1
        if (step - first_step + 1) % log_every and not last:
            continue
        wall_ms = (time.perf_counter() - interval.started) * 1000.0 if timing else 0.0
        record = RunRecord(
            step=step,
            loss=interval.loss_sum / interval.steps,
            acc=interval.correct / interval.tokens,
            lr=lr,
            wall_ms=wall_ms,
        )
        logger.info(
            f"step {record.step}: loss={record.loss:.4f} acc={record.acc:.4f} "
            f"lr={record.lr:.3g}"
        )
        yield record
        interval = _Interval()


# Variants of the fixed-budget comparison: (ablation preset, n_paths).
COMPARISON_VARIANTS: Dict[str, Tuple[str, int]] = {
    "one_path": ("baseline", 1),
    "two_path_plain": ("multi_path", 2),
    "two_path_full": ("more_features", 2),
}


@dataclass(frozen=True)
class ComparisonRow:
    variant: str
    final_loss: float
    final_acc: float


@dataclass
class ComparisonResult:
    rows: List[ComparisonRow] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.variant, r.final_loss, r.final_acc) for r in self.rows],
            columns=["variant", "final_loss", "final_acc"],
        )

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")

    @classmethod
    def from_csv(cls, text: str) -> "ComparisonResult":
        frame = pd.read_csv(io.StringIO(text), float_precision="round_trip")
        return cls(
            rows=[
                ComparisonRow(str(r.variant), float(r.final_loss), float(r.final_acc))
                for r in frame.itertuples(index=False)
            ]
        )


def comparison_configs(base: ModelConfig) -> Dict[str, ModelConfig]:
    """The comparison variants of ``base``, sharing every non-multipath field."""
    return {
        name: base.model_copy(update={"multipath": ablation_preset(preset, n)})
        for name, (preset, n) in COMPARISON_VARIANTS.items()
    }


def depth_path_grid(base: ModelConfig) -> Dict[str, ModelConfig]:
    """
    Encoders with the same depth·paths product as ``base``, deepest first.

    Every variant has the same path-weight budget; only how it is split
    between layers and parallel paths changes. A base of depth 2 with 2 paths
    gives depth4_path1, depth2_path2 and depth1_path4.
    """
    budget = base.enc_depth * base.n_paths
    variants: Dict[str, ModelConfig] = {}
    for depth in range(budget, 0, -1):
        if budget % depth:
            continue
        n = budget // depth
        data = base.model_dump()
        data["enc_depth"] = depth
        data["multipath"]["n_paths"] = n
        variants[f"depth{depth}_path{n}"] = ModelConfig.model_validate(data)
    return variants


def run_comparison(
    variants: Dict[str, ModelConfig],
    task: TaskSpec,
    sched: ScheduleConfig,
    cfg: TrainConfig,
) -> ComparisonResult:
    """Train every variant for the same step budget; report its last record."""
    result = ComparisonResult()
    for name, model_cfg in variants.items():
        logger.info(f"Comparison: training variant '{name}' for {cfg.steps} steps")
        model = build_model(model_cfg)
        last: Optional[RunRecord] = None
        for last in train(
            model,
            task,
            sched,
            steps=cfg.steps,
            batch=cfg.batch,
            log_every=cfg.log_every,
            clip_norm=cfg.clip_norm,
            mode=cfg.mode,
            timing=False,
        ):
            pass
        if last is None:
            result.rows.append(ComparisonRow(name, float("nan"), float("nan")))
        else:
            result.rows.append(ComparisonRow(name, last.loss, last.acc))
    return result
