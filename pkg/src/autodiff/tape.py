# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import contextvars
import logging
import threading
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, List, Optional, Tuple

if TYPE_CHECKING:
    from .tensor import Function, Tensor

logger = logging.getLogger(__name__)

_current_tape: contextvars.ContextVar[Optional["Tape"]] = contextvars.ContextVar(
    "current_tape", default=None
)
_grad_enabled: contextvars.ContextVar[bool] = contextvars.ContextVar(
    "grad_enabled", default=True
)


@dataclass(eq=False)
class Node:
    """One recorded operation: its inputs, its output and the backward rule."""

    index: int
    function: "Function"
    inputs: Tuple["Tensor", ...]
    output: "Tensor"
    tape: "Tape"


class Tape:
    """
    Ordered record of differentiable operations.

    Recording is opt-in: operations are taped only inside ``with Tape()``.

    Nodes are appended after their inputs exist, so the list is always
    topological. Worker threads spawned with a copied context share the
    parent's tape; appends are serialized by a lock.
    """

    def __init__(self) -> None:
        self.nodes: List[Node] = []
        self.consumed = False
        self._lock = threading.Lock()
        self._token: Optional[contextvars.Token] = None

    def record(
        self, function: "Function", inputs: Tuple["Tensor", ...], output: "Tensor"
    ) -> Node:
        with self._lock:
            node = Node(len(self.nodes), function, inputs, output, self)
            self.nodes.append(node)
        return node

    def __len__(self) -> int:
        return len(self.nodes)

    def __enter__(self) -> "Tape":
        self._token = _current_tape.set(self)
        return self

    def __exit__(self, *exc: Any) -> None:
        if self._token is not None:
            _current_tape.reset(self._token)
            self._token = None


def active_tape() -> Optional[Tape]:
    """
    Return the live tape of this context, or ``None`` outside ``with Tape()``.

    Inside a ``with Tape()`` block a consumed tape is replaced by a fresh one,
    so a block may run several forward/backward rounds.
    """
    tape = _current_tape.get()
    if tape is None:
        return None
    if tape.consumed:
        tape = Tape()
        _current_tape.set(tape)
    return tape


def is_grad_enabled() -> bool:
    return _grad_enabled.get()


class no_grad:
    """Context manager that disables recording, used by oracles and eval loops."""

    def __enter__(self) -> None:
        self._token = _grad_enabled.set(False)

    def __exit__(self, *exc: Any) -> None:
        _grad_enabled.reset(self._token)
