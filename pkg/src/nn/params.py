# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.autodiff import Tensor
from src.errors import ShapeError

LAYER_NORM_EPS = 1e-5
FFN_EXPANSION = 4


@dataclass
class AttentionParams:
    """Query/key/value projections. There is no output projection."""

    w_q: Tensor
    w_k: Tensor
    w_v: Tensor
    heads: int

    def __post_init__(self) -> None:
        d = self.w_q.shape[0]
        for name, w in self.named_tensors().items():
            if w.shape != (d, d):
                raise ShapeError(f"attention {name} must be [{d}×{d}], got {w.shape}")
        if self.heads < 1 or d % self.heads != 0:
            raise ShapeError(f"heads={self.heads} must divide d={d}")

    @property
    def d_model(self) -> int:
        return self.w_q.shape[0]

    def named_tensors(self) -> Dict[str, Tensor]:
        return {"w_q": self.w_q, "w_k": self.w_k, "w_v": self.w_v}


@dataclass
class FfnParams:
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor

    def __post_init__(self) -> None:
        d = self.w1.shape[0]
        hidden = FFN_EXPANSION * d
        expected = {
            "w1": (d, hidden),
            "b1": (hidden,),
            "w2": (hidden, d),
            "b2": (d,),
        }
        for name, w in self.named_tensors().items():
            if w.shape != expected[name]:
                raise ShapeError(
                    f"ffn {name} must have shape {expected[name]}, got {w.shape}"
                )

    @property
    def d_model(self) -> int:
        return self.w1.shape[0]

    def named_tensors(self) -> Dict[str, Tensor]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}


@dataclass
class LayerNormParams:
    gain: Tensor
    bias: Tensor
    eps: float = LAYER_NORM_EPS

    def __post_init__(self) -> None:
        if self.gain.ndim != 1 or self.gain.shape != self.bias.shape:
            raise ShapeError(
                f"layer norm gain {self.gain.shape} and bias {self.bias.shape} "
                "must be matching vectors"
            )
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    @property
    def d_model(self) -> int:
        return self.gain.shape[0]

    def named_tensors(self) -> Dict[str, Tensor]:
        return {"gain": self.gain, "bias": self.bias}


def xavier_uniform(
    rng: np.random.Generator, fan_in: int, fan_out: int, trainable: bool = True
) -> Tensor:
    """uniform(−√(6/(fan_in+fan_out)), +√(6/(fan_in+fan_out)))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=(fan_in, fan_out)), trainable)


def init_attention(
    d_model: int, heads: int, rng: np.random.Generator, trainable: bool = True
) -> AttentionParams:
    return AttentionParams(
        w_q=xavier_uniform(rng, d_model, d_model, trainable),
        w_k=xavier_uniform(rng, d_model, d_model, trainable),
        w_v=xavier_uniform(rng, d_model, d_model, trainable),
        heads=heads,
    )


def init_ffn(
    d_model: int, rng: np.random.Generator, trainable: bool = True
) -> FfnParams:
    hidden = FFN_EXPANSION * d_model
    return FfnParams(
        w1=xavier_uniform(rng, d_model, hidden, trainable),
        b1=Tensor(np.zeros(hidden), trainable),
        w2=xavier_uniform(rng, hidden, d_model, trainable),
        b2=Tensor(np.zeros(d_model), trainable),
    )


def init_layer_norm(d_model: int, trainable: bool = True) -> LayerNormParams:
    return LayerNormParams(
        gain=Tensor(np.ones(d_model), trainable),
        bias=Tensor(np.zeros(d_model), trainable),
    )
