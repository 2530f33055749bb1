# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import math
from typing import Optional, Sequence

import numpy as np

from src.autodiff import Tensor, add, gather_rows, scale
from src.errors import TokenRangeError


def sinusoidal_encoding(positions: np.ndarray, d_model: int) -> np.ndarray:
    """
    Fixed sinusoidal positional encoding.

    Even columns hold sin(pos / 10000^(2i/d)), odd columns the matching cos.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 1)
    pairs = np.arange(0, d_model, 2, dtype=np.float64)
    angles = positions / np.power(10000.0, pairs / d_model)
    pe = np.zeros((positions.shape[0], d_model))
    pe[:, 0::2] = np.sin(angles)
    pe[:, 1::2] = np.cos(angles[:, : d_model // 2])
    return pe


def check_token_ids(tokens: np.ndarray, vocab_size: int) -> None:
    if tokens.size and (tokens.min() < 0 or tokens.max() >= vocab_size):
        bad = tokens[(tokens < 0) | (tokens >= vocab_size)]
        raise TokenRangeError(
            f"token ids {bad.tolist()} outside vocabulary of size {vocab_size}"
        )


def embed_and_position(
    tokens: Sequence[int],
    table: Tensor,
    positions: Optional[Sequence[int]] = None,
) -> Tensor:
    """
    Row lookup scaled by √d plus the sinusoidal encoding.

    ``positions`` defaults to 0..t−1; packed batches pass per-sequence
    positions so every sequence restarts at 0.
    """
    ids = np.asarray(tokens, dtype=np.int64).reshape(-1)
    vocab_size, d_model = table.shape
    check_token_ids(ids, vocab_size)
    if positions is None:
        positions = np.arange(len(ids))
    pe = Tensor(sinusoidal_encoding(np.asarray(positions), d_model))
    return add(scale(gather_rows(table, ids), math.sqrt(d_model)), pe)
