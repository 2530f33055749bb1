# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import numpy as np

from src.autodiff import Tensor
from src.errors import MissingGradientError, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """Adam moments per parameter name. No weight decay."""

    beta1: float = 0.9
    beta2: float = 0.997
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError(
                f"Adam betas must lie in [0, 1), got {self.beta1}, {self.beta2}"
            )
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.step < 0:
            raise ValueError(f"step must be >= 0, got {self.step}")


def adam_step(
    params: Mapping[str, Tensor],
    grads: Optional[Mapping[str, np.ndarray]],
    st: OptimizerState,
    lr: float,
) -> OptimizerState:
    """
    One bias-corrected Adam update, applied to ``params`` in place.

    Args:
        params: Named trainable tensors.
        grads: Gradient per name; ``None`` reads each tensor's ``grad``.
        st: Moments and step counter, updated in place.
        lr: Step size for this update.

    Returns:
        OptimizerState: ``st``, for chaining.
    """
    resolved: Dict[str, np.ndarray] = {}
    for name, p in params.items():
        g = p.grad if grads is None else grads.get(name)
        if g is None:
            raise MissingGradientError(f"no gradient for parameter '{name}'")
        g = np.asarray(g, dtype=np.float64)
        if g.shape != p.shape:
            raise ShapeError(f"{name}: grad shape {g.shape} != param shape {p.shape}")
        resolved[name] = g

    st.step += 1
    bias1 = 1.0 - st.beta1**st.step
    bias2 = 1.0 - st.beta2**st.step
    for name, p in params.items():
        g = resolved[name]
        m = st.m.get(name)
        if m is None:
            m = st.m[name] = np.zeros(p.shape)
            st.v[name] = np.zeros(p.shape)
        elif m.shape != p.shape:
            raise ShapeError(f"{name}: moment shape {m.shape} != param {p.shape}")
        v = st.v[name]
        m *= st.beta1
        m += (1.0 - st.beta1) * g
        v *= st.beta2
        v += (1.0 - st.beta2) * g * g
        m_hat = m / bias1
        v_hat = v / bias2
        p.data -= lr * m_hat / (np.sqrt(v_hat) + st.eps)
    return st


def global_grad_norm(params: Mapping[str, Tensor]) -> float:
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    return float(np.sqrt(total))


def clip_grad_norm(params: Mapping[str, Tensor], max_norm: float) -> float:
    """Rescale grads so their global L2 norm is at most ``max_norm``."""
    if max_norm <= 0:
        raise ValueError(f"max_norm must be positive, got {max_norm}")
    norm = global_grad_norm(params)
    if norm > max_norm:
        factor = max_norm / norm
        for p in params.values():
            if p.grad is not None:
                p.grad = p.grad * factor
        logger.debug(f"Clipped gradient norm {norm:.4g} -> {max_norm}")
    return norm
