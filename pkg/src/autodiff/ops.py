# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

"""
Differentiable operations.

Only what the Transformer equations need: 2-D matrix products, row-wise
softmax/normalization, a bias broadcast over rows and a handful of
elementwise and structural ops. No general broadcasting.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from src.errors import ShapeError

from .tensor import Function, Tensor

logger = logging.getLogger(__name__)


def _require_same_shape(op: str, *arrays: np.ndarray) -> None:
    first = arrays[0].shape
    for arr in arrays[1:]:
        if arr.shape != first:
            raise ShapeError(f"{op}: shape mismatch {first} vs {arr.shape}")


class MatMul(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
        self.a, self.b = a, b
        return a @ b

    def backward(self, grad):
        return grad @ self.b.T, self.a.T @ grad


class Add(Function):
    def forward(self, a, b):
        _require_same_shape("add", a, b)
        return a + b

    def backward(self, grad):
        return grad, grad


class AddBias(Function):
    """x [t×d] + b [d], bias broadcast over rows."""

    def forward(self, x, b):
        if x.ndim != 2 or b.shape != (x.shape[1],):
            raise ShapeError(f"add_bias: cannot add bias {b.shape} to {x.shape}")
        return x + b

    def backward(self, grad):
        return grad, grad.sum(axis=0)


class Mul(Function):
    def forward(self, a, b):
        _require_same_shape("mul", a, b)
        self.a, self.b = a, b
        return a * b

    def backward(self, grad):
        return grad * self.b, grad * self.a


class Scale(Function):
    def forward(self, x, factor: float = 1.0):
        self.factor = factor
        return x * factor

    def backward(self, grad):
        return (grad * self.factor,)


class Sum(Function):
    def forward(self, x):
        self.shape = x.shape
        return np.array(x.sum())

    def backward(self, grad):
        return (np.broadcast_to(grad, self.shape).copy(),)


class Relu(Function):
    def forward(self, x):
        self.mask = x > 0
        return np.where(self.mask, x, 0.0)

    def backward(self, grad):
        return (grad * self.mask,)


class SoftmaxRows(Function):
    """Row softmax with max subtraction; masked-out entries get weight 0."""

    def forward(self, x, mask: Optional[np.ndarray] = None):
        if x.ndim != 2:
            raise ShapeError(f"softmax_rows: expected a matrix, got {x.shape}")
        if mask is not None:
            if mask.shape != x.shape:
                raise ShapeError(
                    f"softmax_rows: mask {mask.shape} does not match scores {x.shape}"
                )
            x = np.where(mask, x, -np.inf)
        if x.shape[1] == 0:
            self.y = x.copy()
            return self.y
        z = x - x.max(axis=1, keepdims=True)
        e = np.exp(z)
        self.y = e / e.sum(axis=1, keepdims=True)
        return self.y

    def backward(self, grad):
        y = self.y
        return (y * (grad - (grad * y).sum(axis=1, keepdims=True)),)


class Transpose(Function):
    def forward(self, x):
        if x.ndim != 2:
            raise ShapeError(f"transpose: expected a matrix, got {x.shape}")
        return x.T.copy()

    def backward(self, grad):
        return (grad.T.copy(),)


class ColumnSlice(Function):
    def forward(self, x, start: int = 0, stop: int = 0):
        self.shape, self.start, self.stop = x.shape, start, stop
        return x[:, start:stop].copy()

    def backward(self, grad):
        full = np.zeros(self.shape)
        full[:, self.start : self.stop] = grad
        return (full,)


class ConcatColumns(Function):
    def forward(self, *xs):
        rows = {x.shape[0] for x in xs}
        if len(rows) != 1:
            raise ShapeError(
                f"concat_columns: row counts differ {[x.shape for x in xs]}"
            )
        self.widths = [x.shape[1] for x in xs]
        return np.concatenate(xs, axis=1)

    def backward(self, grad):
        bounds = np.cumsum([0] + self.widths)
        return tuple(
            grad[:, bounds[i] : bounds[i + 1]].copy() for i in range(len(self.widths))
        )


class GatherRows(Function):
    """Embedding lookup; backward scatter-adds into the table."""

    def forward(self, table, ids: Optional[np.ndarray] = None):
        self.shape, self.ids = table.shape, ids
        return table[ids]

    def backward(self, grad):
        full = np.zeros(self.shape)
        np.add.at(full, self.ids, grad)
        return (full,)


class LayerNorm(Function):
    """Per-row mean-0/var-1 normalization followed by gain ⊙ · + bias."""

    def forward(self, x, gain, bias, eps: float = 1e-5):
        if x.ndim != 2 or gain.shape != (x.shape[1],) or bias.shape != (x.shape[1],):
            raise ShapeError(
                f"layer_norm: input {x.shape} does not match gain {gain.shape} "
                f"and bias {bias.shape}"
            )
        mean = x.mean(axis=1, keepdims=True)
        centered = x - mean
        var = (centered * centered).mean(axis=1, keepdims=True)
        self.inv_std = 1.0 / np.sqrt(var + eps)
        self.x_hat = centered * self.inv_std
        self.gain = gain
        return self.x_hat * gain + bias

    def backward(self, grad):
        x_hat, inv_std = self.x_hat, self.inv_std
        d = x_hat.shape[1]
        g_hat = grad * self.gain
        dx = (
            inv_std
            / d
            * (
                d * g_hat
                - g_hat.sum(axis=1, keepdims=True)
                - x_hat * (g_hat * x_hat).sum(axis=1, keepdims=True)
            )
        )
        return dx, (grad * x_hat).sum(axis=0), grad.sum(axis=0)


class Average(Function):
    """Elementwise mean of k same-shaped inputs, summed in input order."""

    def forward(self, *xs):
        if not xs:
            raise ShapeError("average: needs at least one input")
        _require_same_shape("average", *xs)
        total = xs[0].copy()
        for x in xs[1:]:
            total = total + x
        self.k = len(xs)
        return total / self.k

    def backward(self, grad):
        share = grad / self.k
        return tuple(share for _ in range(self.k))


class WeightedFusion(Function):
    """
    beta * x + sum_i alpha[i] * features[i].

    The reduction runs in feature order so sequential and concurrent path
    execution produce the same bits.
    """

    def forward(self, x, alpha, beta, *features):
        if alpha.shape != (len(features),):
            raise ShapeError(
                f"fuse: alpha has shape {alpha.shape} but {len(features)} features"
            )
        if beta.size != 1:
            raise ShapeError(f"fuse: beta must be a scalar, got shape {beta.shape}")
        _require_same_shape("fuse", x, *features)
        self.x, self.alpha, self.beta, self.features = x, alpha, beta, features
        out = float(beta.reshape(-1)[0]) * x
        for a, f in zip(alpha, features):
            out = out + a * f
        return out

    def backward(self, grad):
        beta = float(self.beta.reshape(-1)[0])
        d_alpha = np.array([(grad * f).sum() for f in self.features])
        d_beta = np.array((grad * self.x).sum()).reshape(self.beta.shape)
        d_features = tuple(a * grad for a in self.alpha)
        return (beta * grad, d_alpha, d_beta) + d_features


class CrossEntropy(Function):
    """Mean token-level cross-entropy of row logits against integer targets."""

    def forward(self, logits, targets: Optional[np.ndarray] = None):
        if logits.ndim != 2 or targets.shape != (logits.shape[0],):
            raise ShapeError(
                f"cross_entropy: logits {logits.shape} vs targets {targets.shape}"
            )
        z = logits - logits.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(z).sum(axis=1, keepdims=True))
        log_probs = z - log_z
        self.probs = np.exp(log_probs)
        self.targets = targets
        rows = np.arange(len(targets))
        return np.array(-log_probs[rows, targets].mean())

    def backward(self, grad):
        n = len(self.targets)
        d = self.probs.copy()
        d[np.arange(n), self.targets] -= 1.0
        return (d * (float(grad) / n),)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return MatMul.apply(a, b)


def add(a: Tensor, b: Tensor) -> Tensor:
    return Add.apply(a, b)


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    return AddBias.apply(x, b)


def mul(a: Tensor, b: Tensor) -> Tensor:
    return Mul.apply(a, b)


def scale(x: Tensor, factor: float) -> Tensor:
    return Scale.apply(x, factor=float(factor))


def sum_all(x: Tensor) -> Tensor:
    return Sum.apply(x)


def relu(x: Tensor) -> Tensor:
    return Relu.apply(x)


def softmax_rows(x: Tensor, mask: Optional[np.ndarray] = None) -> Tensor:
    return SoftmaxRows.apply(x, mask=mask)


def transpose(x: Tensor) -> Tensor:
    return Transpose.apply(x)


def column_slice(x: Tensor, start: int, stop: int) -> Tensor:
    return ColumnSlice.apply(x, start=start, stop=stop)


def concat_columns(xs: Sequence[Tensor]) -> Tensor:
    return ConcatColumns.apply(*xs)


def gather_rows(table: Tensor, ids: np.ndarray) -> Tensor:
    return GatherRows.apply(table, ids=np.asarray(ids, dtype=np.int64))


def layer_norm_op(x: Tensor, gain: Tensor, bias: Tensor, eps: float) -> Tensor:
    return LayerNorm.apply(x, gain, bias, eps=eps)


def average(xs: Sequence[Tensor]) -> Tensor:
    return Average.apply(*xs)


def weighted_fusion(
    x: Tensor, alpha: Tensor, beta: Tensor, features: Sequence[Tensor]
) -> Tensor:
    return WeightedFusion.apply(x, alpha, beta, *features)


def cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    return CrossEntropy.apply(logits, targets=np.asarray(targets, dtype=np.int64))


def argmax_rows(x: Tensor) -> np.ndarray:
    return x.data.argmax(axis=1)
