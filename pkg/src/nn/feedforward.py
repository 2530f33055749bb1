# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from src.autodiff import Tensor, add_bias, matmul, relu
from src.errors import ShapeError

from .params import FfnParams


def ffn(x: Tensor, p: FfnParams) -> Tensor:
    """ReLU(X W1 + b1) W2 + b2."""
    if x.ndim != 2 or x.shape[1] != p.d_model:
        raise ShapeError(f"ffn: input {x.shape} does not match d={p.d_model}")
    hidden = relu(add_bias(matmul(x, p.w1), p.b1))
    return add_bias(matmul(hidden, p.w2), p.b2)
