# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from src.autodiff import (
    Tensor,
    column_slice,
    concat_columns,
    matmul,
    scale,
    softmax_rows,
    transpose,
)
from src.errors import ShapeError

from .params import AttentionParams

logger = logging.getLogger(__name__)


def causal_mask(t: int) -> np.ndarray:
    """Boolean [t×t]; True where query i may attend key j (j ≤ i)."""
    return np.tril(np.ones((t, t), dtype=bool))


def block_mask(
    query_lengths: Sequence[int],
    key_lengths: Optional[Sequence[int]] = None,
    causal: bool = False,
) -> np.ndarray:
    """
    Block-diagonal mask for sequences packed along rows.

    Query block i only sees key block i; with ``causal`` each block is
    additionally lower-triangular.
    """
    key_lengths = query_lengths if key_lengths is None else key_lengths
    if len(query_lengths) != len(key_lengths):
        raise ShapeError(
            f"block_mask: {len(query_lengths)} query blocks vs "
            f"{len(key_lengths)} key blocks"
        )
    mask = np.zeros((sum(query_lengths), sum(key_lengths)), dtype=bool)
    q0 = k0 = 0
    for tq, tk in zip(query_lengths, key_lengths):
        block = causal_mask(tq)[:, :tk] if causal else np.ones((tq, tk), dtype=bool)
        mask[q0 : q0 + tq, k0 : k0 + tk] = block
        q0, k0 = q0 + tq, k0 + tk
    return mask


def _check_input(x: Tensor, p: AttentionParams, what: str) -> None:
    if x.ndim != 2 or x.shape[1] != p.d_model:
        raise ShapeError(f"{what}: input {x.shape} does not match d={p.d_model}")


def _head_slices(p: AttentionParams) -> List[slice]:
    width = p.d_model // p.heads
    return [slice(h * width, (h + 1) * width) for h in range(p.heads)]


def _split(x: Tensor, p: AttentionParams) -> List[Tensor]:
    if p.heads == 1:
        return [x]
    return [column_slice(x, s.start, s.stop) for s in _head_slices(p)]


def attention_weights(
    x: Tensor,
    p: AttentionParams,
    memory: Optional[Tensor] = None,
    mask: Optional[np.ndarray] = None,
) -> List[Tensor]:
    """
    Per-head attention matrices SoftMax(Q_h K_hᵀ / √(d/heads)).

    Queries come from ``x``; keys come from ``memory`` when given (cross
    attention), otherwise from ``x``.
    """
    _check_input(x, p, "attention_weights")
    source = x if memory is None else memory
    _check_input(source, p, "attention_weights(memory)")
    q = matmul(x, p.w_q)
    k = matmul(source, p.w_k)
    factor = 1.0 / math.sqrt(p.d_model // p.heads)
    return [
        softmax_rows(scale(matmul(q_h, transpose(k_h)), factor), mask=mask)
        for q_h, k_h in zip(_split(q, p), _split(k, p))
    ]


def mha(
    x: Tensor,
    p: AttentionParams,
    memory: Optional[Tensor] = None,
    mask: Optional[np.ndarray] = None,
) -> Tensor:
    """A_x · X W_v per head, heads concatenated back to width d."""
    weights = attention_weights(x, p, memory=memory, mask=mask)
    source = x if memory is None else memory
    v = matmul(source, p.w_v)
    heads = [matmul(a, v_h) for a, v_h in zip(weights, _split(v, p))]
    if len(heads) == 1:
        return heads[0]
    return concat_columns(heads)
