# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from .attention import attention_weights, block_mask, causal_mask, mha
from .embedding import check_token_ids, embed_and_position, sinusoidal_encoding
from .feedforward import ffn
from .norm import layer_norm
from .params import (
    FFN_EXPANSION,
    LAYER_NORM_EPS,
    AttentionParams,
    FfnParams,
    LayerNormParams,
    init_attention,
    init_ffn,
    init_layer_norm,
    xavier_uniform,
)

__all__ = [
    "AttentionParams",
    "FfnParams",
    "LayerNormParams",
    "FFN_EXPANSION",
    "LAYER_NORM_EPS",
    "init_attention",
    "init_ffn",
    "init_layer_norm",
    "xavier_uniform",
    "layer_norm",
    "attention_weights",
    "mha",
    "ffn",
    "causal_mask",
    "block_mask",
    "embed_and_position",
    "sinusoidal_encoding",
    "check_token_ids",
]
