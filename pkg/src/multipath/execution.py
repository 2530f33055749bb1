# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import atexit
import contextvars
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from src.autodiff import active_tape, is_grad_enabled

from .config import ExecutionMode

logger = logging.getLogger(__name__)

T = TypeVar("T")

_executor: Optional[ThreadPoolExecutor] = None
_executor_lock = threading.Lock()


def available_cores() -> int:
    return os.cpu_count() or 1


def get_executor() -> ThreadPoolExecutor:
    """Process-wide pool used for concurrent path evaluation."""
    global _executor
    with _executor_lock:
        if _executor is None:
            workers = available_cores()
            _executor = ThreadPoolExecutor(
                max_workers=workers, thread_name_prefix="path"
            )
            logger.debug(f"Started path executor with {workers} workers")
        return _executor


def shutdown_executor() -> None:
    global _executor
    with _executor_lock:
        if _executor is not None:
            _executor.shutdown(wait=True)
            _executor = None


atexit.register(shutdown_executor)


def run_paths(
    tasks: Sequence[Callable[[], T]], mode: ExecutionMode = ExecutionMode.SEQUENTIAL
) -> List[T]:
    """
    Evaluate independent path computations and return results in task order.

    Concurrent tasks run in copies of the caller's context, so they record
    onto the caller's tape and honour ``no_grad``.
    """
    if mode is ExecutionMode.SEQUENTIAL or len(tasks) <= 1:
        return [task() for task in tasks]
    if is_grad_enabled():
        active_tape()
    executor = get_executor()
    futures = [executor.submit(contextvars.copy_context().run, task) for task in tasks]
    return [future.result() for future in futures]
