# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from .gradcheck import (
    DEFAULT_MAX_PARAMS,
    GRAD_GROUPS,
    GradCheckReport,
    check_model_grads,
    grad_check_model,
    grad_group,
    make_check_batch,
)
from .optimizer import OptimizerState, adam_step, clip_grad_norm, global_grad_norm
from .records import RecordWriter, RunRecord, read_records, write_records
from .schedule import (
    SCHEDULE_PRESETS,
    ScheduleConfig,
    ScheduleForm,
    classical_lr_at,
    learning_rate,
    lr_at,
    schedule_preset,
)
from .tasks import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    Batch,
    Example,
    TaskKind,
    TaskSpec,
    iterate_batches,
    make_batch,
    make_examples,
)
from .trainer import (
    COMPARISON_VARIANTS,
    ComparisonResult,
    ComparisonRow,
    TrainConfig,
    comparison_configs,
    depth_path_grid,
    run_comparison,
    train,
    train_step,
)

__all__ = [
    "ScheduleConfig",
    "SCHEDULE_PRESETS",
    "schedule_preset",
    "ScheduleForm",
    "lr_at",
    "classical_lr_at",
    "learning_rate",
    "OptimizerState",
    "adam_step",
    "clip_grad_norm",
    "global_grad_norm",
    "TaskKind",
    "TaskSpec",
    "Example",
    "Batch",
    "PAD_ID",
    "BOS_ID",
    "EOS_ID",
    "make_examples",
    "make_batch",
    "iterate_batches",
    "RunRecord",
    "RecordWriter",
    "write_records",
    "read_records",
    "TrainConfig",
    "train",
    "train_step",
    "COMPARISON_VARIANTS",
    "ComparisonRow",
    "ComparisonResult",
    "comparison_configs",
    "depth_path_grid",
    "run_comparison",
    "GRAD_GROUPS",
    "DEFAULT_MAX_PARAMS",
    "GradCheckReport",
    "grad_group",
    "make_check_batch",
    "check_model_grads",
    "grad_check_model",
]
