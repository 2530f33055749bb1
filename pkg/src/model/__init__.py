# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from .checkpoint import (
    CHECKPOINT_FORMAT,
    CHECKPOINT_SCHEMA_VERSION,
    checkpoint_dict,
    load_checkpoint,
    load_state,
    read_checkpoint,
    save_checkpoint,
)
from .config import ModelConfig
from .counting import (
    PARAM_GROUPS,
    ParamBreakdown,
    enumerate_params,
    group_of,
    param_count,
)
from .diversity import (
    DiversityReport,
    DiversityRow,
    alpha_diversity,
    diversity_value,
)
from .model import DecoderLayer, EncoderLayer, Model, build_model, forward

__all__ = [
    "ModelConfig",
    "Model",
    "EncoderLayer",
    "DecoderLayer",
    "build_model",
    "forward",
    "PARAM_GROUPS",
    "ParamBreakdown",
    "param_count",
    "enumerate_params",
    "group_of",
    "DiversityReport",
    "DiversityRow",
    "alpha_diversity",
    "diversity_value",
    "CHECKPOINT_FORMAT",
    "CHECKPOINT_SCHEMA_VERSION",
    "checkpoint_dict",
    "save_checkpoint",
    "load_checkpoint",
    "load_state",
    "read_checkpoint",
]
