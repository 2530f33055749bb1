# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from .bench import (
    BENCH_COLUMNS,
    BenchMode,
    BenchResult,
    BenchRow,
    BenchSpec,
    estimate_memory_mb,
    run_bench,
)

__all__ = [
    "BENCH_COLUMNS",
    "BenchMode",
    "BenchSpec",
    "BenchRow",
    "BenchResult",
    "estimate_memory_mb",
    "run_bench",
]
