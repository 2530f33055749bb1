# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from src.autodiff import Tensor, layer_norm_op
from src.errors import ShapeError

from .params import LayerNormParams


def layer_norm(x: Tensor, p: LayerNormParams) -> Tensor:
    """Normalize each position (row) to mean 0 / variance 1, then gain ⊙ · + bias."""
    if x.ndim != 2 or x.shape[1] != p.d_model:
        raise ShapeError(
            f"layer_norm: input {x.shape} does not match d={p.d_model}"
        )
    return layer_norm_op(x, p.gain, p.bias, p.eps)
