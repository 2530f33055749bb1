# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
from typing import Callable, Union

import numpy as np

from .tape import no_grad
from .tensor import Tensor

logger = logging.getLogger(__name__)

# Gradients smaller than this are compared in absolute terms.
RELATIVE_ERROR_FLOOR = 1e-4


def _as_float(value: Union[Tensor, float]) -> float:
    if isinstance(value, Tensor):
        return value.item()
    return float(value)


def finite_diff_grad(
    f: Callable[[Tensor], Union[Tensor, float]], x: Tensor, h: float = 1e-5
) -> Tensor:
    """
    Central-difference gradient of a scalar function at ``x``.

    ``x.data`` is perturbed in place one element at a time and restored
    afterwards, so ``f`` may close over a model that owns ``x``.

    Args:
        f: Deterministic scalar function of ``x``.
        x: Point of evaluation.
        h: Step size, must be positive.

    Returns:
        Tensor: Gradient estimate with the shape of ``x``.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    grad = np.zeros(x.shape)
    flat = x.data.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            f_plus = _as_float(f(x))
            flat[i] = original - h
            f_minus = _as_float(f(x))
            flat[i] = original
            grad.flat[i] = (f_plus - f_minus) / (2.0 * h)
    return Tensor(grad)


def relative_error(
    a: np.ndarray, b: np.ndarray, floor: float = RELATIVE_ERROR_FLOOR
) -> float:
    """‖a−b‖₂ / max(‖a‖₂, ‖b‖₂, floor)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), floor)
    return float(np.linalg.norm(a - b) / scale)
