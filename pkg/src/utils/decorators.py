# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import functools
import logging
import time
from typing import Any, Callable

logger = logging.getLogger(__name__)


def log_io(func: Callable) -> Callable:
    """
    A decorator that logs the input parameters, output and duration of a
    command handler at DEBUG level.

    Args:
        func: The handler to be decorated

    Returns:
        The wrapped function with input/output logging
    """

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        func_name = func.__name__
        params = ", ".join(
            [*(str(arg) for arg in args), *(f"{k}={v}" for k, v in kwargs.items())]
        )
        logger.debug(f"Command {func_name} called with parameters: {params}")

        started = time.perf_counter()
        result = func(*args, **kwargs)
        elapsed = time.perf_counter() - started

        logger.debug(f"Command {func_name} returned {result!r} in {elapsed:.2f}s")
        return result

    return wrapper
