# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from .gradcheck import finite_diff_grad, relative_error
from .ops import (
    add,
    add_bias,
    argmax_rows,
    average,
    column_slice,
    concat_columns,
    cross_entropy,
    gather_rows,
    layer_norm_op,
    matmul,
    mul,
    relu,
    scale,
    softmax_rows,
    sum_all,
    transpose,
    weighted_fusion,
)
from .tape import Tape, active_tape, is_grad_enabled, no_grad
from .tensor import Function, Tensor, backward

__all__ = [
    "Tensor",
    "Tape",
    "Function",
    "backward",
    "active_tape",
    "no_grad",
    "is_grad_enabled",
    "finite_diff_grad",
    "relative_error",
    "matmul",
    "add",
    "add_bias",
    "mul",
    "scale",
    "sum_all",
    "relu",
    "softmax_rows",
    "transpose",
    "column_slice",
    "concat_columns",
    "gather_rows",
    "layer_norm_op",
    "average",
    "weighted_fusion",
    "cross_entropy",
    "argmax_rows",
]
