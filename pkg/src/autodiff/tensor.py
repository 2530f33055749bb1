# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
from abc import abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import TapeError

from .tape import Node, active_tape, is_grad_enabled

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float, int, Sequence[Any]]


class Tensor:
    """
    Dense float64 array with an autodiff handle.

    ``data`` is row-major and contiguous. It is treated as immutable except by
    the optimizer, checkpoint loading and the finite-difference oracle, all of
    which need exclusive access to the tensor.
    """

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        name: Optional[str] = None,
    ):
        self.data: np.ndarray = np.array(data, dtype=np.float64, order="C")
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._node: Optional[Node] = None

    @classmethod
    def _wrap(cls, array: np.ndarray) -> "Tensor":
        out = cls.__new__(cls)
        out.data = np.ascontiguousarray(array, dtype=np.float64)
        out.requires_grad = False
        out.grad = None
        out.name = None
        out._node = None
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def item(self) -> float:
        if self.size != 1:
            raise ValueError(f"item() needs a 1-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64).reshape(self.shape)
        else:
            self.grad = self.grad + grad

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return (
            f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"
        )


class Function:
    """
    Base class for differentiable operations.

    ``forward`` receives the input arrays, ``backward`` receives dL/d(output)
    and returns one gradient (or ``None``) per input, in input order.
    """

    def __init__(self, *inputs: Tensor):
        self.inputs = inputs

    @abstractmethod
    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError("Forward pass not implemented for this function")

    @abstractmethod
    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError("Backward pass not implemented for this function")

    @classmethod
    def apply(cls, *inputs: Tensor, **kwargs: Any) -> Tensor:
        fn = cls(*inputs)
        out = Tensor._wrap(fn.forward(*(t.data for t in inputs), **kwargs))
        if is_grad_enabled() and any(t.requires_grad for t in inputs):
            tape = active_tape()
            if tape is not None:
                out.requires_grad = True
                out._node = tape.record(fn, inputs, out)
        return out


def _topological_order(root: Node) -> List[Node]:
    """Iterative post-order DFS; input order fixes the result, not recording order."""
    order: List[Node] = []
    visited = set()
    stack: List[Tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for t in reversed(node.inputs):
            if t._node is not None and id(t._node) not in visited:
                stack.append((t._node, False))
    return order


def backward(loss: Tensor) -> None:
    """
    Reverse-mode sweep from a 1-element ``loss``.

    Grads are added to whatever ``grad`` already holds; callers zero them
    between steps. A tape can be swept once; a second call raises ``TapeError``.
    """
    if loss.size != 1:
        raise TapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
    root = loss._node
    if root is None:
        raise TapeError(
            "loss is not the output of a recorded operation; "
            "run the forward pass inside `with Tape():`"
        )
    tape = root.tape
    if tape.consumed:
        raise TapeError(
            "tape already consumed by a previous backward(); run a new forward pass"
        )

    order = _topological_order(root)
    pending: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        grad = pending.pop(id(node.output), None)
        if grad is None:
            continue
        node.output.grad = grad
        input_grads = node.function.backward(grad)
        for t, g in zip(node.inputs, input_grads):
            if g is None or not t.requires_grad:
                continue
            if t._node is None:
                t.accumulate_grad(g)
            else:
                key = id(t)
                pending[key] = pending[key] + g if key in pending else g
    tape.consumed = True
    logger.debug(f"backward swept {len(order)} of {len(tape)} recorded nodes")
