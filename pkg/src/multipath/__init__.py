# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from .config import (
    ABLATION_PRESETS,
    ExecutionMode,
    FixedWeightMode,
    MultiPathConfig,
    SublayerKind,
    ablation_preset,
    feature_count,
)
from .execution import available_cores, get_executor, run_paths, shutdown_executor
from .features import (
    Feature,
    FeatureSet,
    build_feature_set,
    combine_avg,
    select_subsets,
)
from .sublayer import (
    MultiPathParams,
    init_multipath_params,
    multipath_sublayer,
    path_forward,
    path_function,
)
from .weights import fixed_weights, fuse, init_weights

__all__ = [
    "ABLATION_PRESETS",
    "ExecutionMode",
    "FixedWeightMode",
    "MultiPathConfig",
    "SublayerKind",
    "ablation_preset",
    "feature_count",
    "available_cores",
    "get_executor",
    "run_paths",
    "shutdown_executor",
    "Feature",
    "FeatureSet",
    "build_feature_set",
    "combine_avg",
    "select_subsets",
    "MultiPathParams",
    "init_multipath_params",
    "multipath_sublayer",
    "path_forward",
    "path_function",
    "fixed_weights",
    "fuse",
    "init_weights",
]
