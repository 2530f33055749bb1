# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

"""
Wall-clock cost of multi-path encoders as the path count grows.

Every (n_paths, mode) cell times ``reps`` forward+backward passes of a
``depth``-layer encoder after ``warmup_reps`` untimed ones. The reported
ideal cost is the sequential single-path median, the cost n paths would
have with perfect parallelism.
"""

import enum
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.autodiff import Tape, Tensor, backward, mul, sum_all
from src.errors import BenchResourceError
from src.model import Model, ModelConfig, build_model
from src.multipath import ExecutionMode, MultiPathConfig, available_cores
from src.nn import FFN_EXPANSION

logger = logging.getLogger(__name__)

BENCH_COLUMNS = [
    "n_paths",
    "mode",
    "median_ms",
    "p10_ms",
    "p90_ms",
    "ideal_ms",
    "cores",
]


class BenchMode(str, enum.Enum):
    SEQUENTIAL = "sequential"
    CONCURRENT = "concurrent"
    BOTH = "both"

    def execution_modes(self) -> List[ExecutionMode]:
        if self is BenchMode.BOTH:
            return [ExecutionMode.SEQUENTIAL, ExecutionMode.CONCURRENT]
        return [ExecutionMode(self.value)]


class BenchSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    d_model: int = Field(64, ge=1, description="Model width")
    heads: int = Field(4, ge=1, description="Attention heads per path")
    seq_len: int = Field(32, ge=1, description="Tokens per sequence")
    batch: int = Field(4, ge=1, description="Sequences per pass")
    depth: int = Field(2, ge=1, description="Encoder layers")
    vocab_size: int = Field(32, ge=4, description="Vocabulary of the random input")
    path_counts: List[int] = Field(
        default_factory=lambda: [1, 2, 3, 4, 6],
        description="Strictly ascending path counts",
    )
    reps: int = Field(5, ge=3, description="Timed repetitions per cell")
    warmup_reps: int = Field(1, ge=0, description="Untimed repetitions per cell")
    mode: BenchMode = Field(BenchMode.BOTH, description="Execution modes to time")
    use_more_features: bool = Field(False, description="Time the combination step")
    max_memory_mb: float = Field(
        2048.0, gt=0, description="Refuse cells whose estimated footprint exceeds this"
    )
    seed: int = Field(0, description="Seed of weights and inputs")

    @field_validator("path_counts")
    @classmethod
    def _ascending(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("path_counts must not be empty")
        if any(n < 1 for n in v):
            raise ValueError(f"path counts must be >= 1, got {v}")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"path_counts must be strictly ascending, got {v}")
        return v

    def model_config_for(self, n_paths: int) -> ModelConfig:
        return ModelConfig(
            enc_depth=self.depth,
            dec_depth=0,
            d_model=self.d_model,
            heads=self.heads,
            vocab_size=self.vocab_size,
            multipath=MultiPathConfig(
                n_paths=n_paths, use_more_features=self.use_more_features
            ),
            seed=self.seed,
        )


def estimate_memory_mb(spec: BenchSpec, n_paths: int) -> float:
    """Rough upper bound of live float64 values for one pass, in MiB."""
    d, tokens = spec.d_model, spec.batch * spec.seq_len
    m = 2 * n_paths if spec.use_more_features and n_paths >= 3 else n_paths
    # Packed batches attend over all tokens with a block mask.
    attn_path = 3 * spec.heads * tokens * tokens + 8 * tokens * d
    ffn_path = 3 * tokens * FFN_EXPANSION * d + 2 * tokens * d
    fusion = 4 * m * tokens * d
    activations = spec.depth * (n_paths * (attn_path + ffn_path) + 2 * fusion)
    weights = spec.depth * n_paths * (3 * d * d + 2 * FFN_EXPANSION * d * d)
    # params, their grads and backward temporaries
    return 8.0 * (activations + 4 * weights) / 2**20


@dataclass(frozen=True)
class BenchRow:
    n_paths: int
    mode: ExecutionMode
    median_ms: float
    p10_ms: float
    p90_ms: float
    ideal_ms: float
    cores: int


@dataclass
class BenchResult:
    rows: List[BenchRow] = field(default_factory=list)
    # n_paths -> whether sequential and concurrent outputs were bit-identical
    identical_outputs: Dict[int, bool] = field(default_factory=dict)

    def row(self, n_paths: int, mode: ExecutionMode) -> BenchRow:
        for r in self.rows:
            if r.n_paths == n_paths and r.mode is mode:
                return r
        raise KeyError(f"no row for n_paths={n_paths} mode={mode.value}")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                (
                    r.n_paths,
                    r.mode.value,
                    r.median_ms,
                    r.p10_ms,
                    r.p90_ms,
                    r.ideal_ms,
                    r.cores,
                )
                for r in self.rows
            ],
            columns=BENCH_COLUMNS,
        )

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")

    @classmethod
    def from_csv(cls, text: str) -> "BenchResult":
        frame = pd.read_csv(io.StringIO(text), float_precision="round_trip")
        missing = [c for c in BENCH_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"bench CSV lacks columns {missing}")
        return cls(
            rows=[
                BenchRow(
                    n_paths=int(r.n_paths),
                    mode=ExecutionMode(r.mode),
                    median_ms=float(r.median_ms),
                    p10_ms=float(r.p10_ms),
                    p90_ms=float(r.p90_ms),
                    ideal_ms=float(r.ideal_ms),
                    cores=int(r.cores),
                )
                for r in frame.itertuples(index=False)
            ]
        )


@dataclass
class _Workload:
    model: Model
    srcs: List[List[int]]
    upstream: Tensor


def _workload(spec: BenchSpec, n_paths: int) -> _Workload:
    estimate = estimate_memory_mb(spec, n_paths)
    if estimate > spec.max_memory_mb:
        config = spec.model_dump(mode="json")
        config["n_paths"] = n_paths
        config["estimated_mb"] = round(estimate, 1)
        raise BenchResourceError("benchmark cell exceeds the memory guard", config)
    model = build_model(spec.model_config_for(n_paths))
    rng = np.random.default_rng(spec.seed)
    srcs = [
        rng.integers(0, spec.vocab_size, size=spec.seq_len).tolist()
        for _ in range(spec.batch)
    ]
    upstream = Tensor(rng.standard_normal((spec.batch * spec.seq_len, spec.d_model)))
    return _Workload(model, srcs, upstream)


def _pass(work: _Workload, mode: ExecutionMode) -> np.ndarray:
    """One forward+backward; returns the encoder output."""
    work.model.zero_grad()
    with Tape():
        out = work.model.encode(work.srcs, mode)
        backward(sum_all(mul(out, work.upstream)))
    return out.data


def _time_cell(
    work: _Workload, mode: ExecutionMode, spec: BenchSpec
) -> Tuple[np.ndarray, np.ndarray]:
    for _ in range(spec.warmup_reps):
        _pass(work, mode)
    times = np.empty(spec.reps)
    output = None
    for i in range(spec.reps):
        started = time.perf_counter()
        output = _pass(work, mode)
        times[i] = (time.perf_counter() - started) * 1000.0
    return times, output


def run_bench(spec: BenchSpec) -> BenchResult:
    """
    Time every requested (n_paths, mode) cell.

    Raises:
        BenchResourceError: A cell's estimated footprint exceeds
            ``spec.max_memory_mb``; the error carries the offending config.
    """
    cores = available_cores()
    modes = spec.mode.execution_modes()
    measured: List[Tuple[int, ExecutionMode, np.ndarray]] = []
    ideal_ms: Optional[float] = None
    identical: Dict[int, bool] = {}

    for n_paths in spec.path_counts:
        work = _workload(spec, n_paths)
        outputs = {}
        for mode in modes:
            times, outputs[mode] = _time_cell(work, mode, spec)
            measured.append((n_paths, mode, times))
            logger.info(
                f"bench n_paths={n_paths} mode={mode.value}: "
                f"median={np.median(times):.2f}ms over {spec.reps} reps"
            )
            if n_paths == 1 and mode is ExecutionMode.SEQUENTIAL:
                ideal_ms = float(np.median(times))
        if len(outputs) == 2:
            seq = outputs[ExecutionMode.SEQUENTIAL]
            conc = outputs[ExecutionMode.CONCURRENT]
            identical[n_paths] = bool(np.array_equal(seq, conc))
            if not identical[n_paths]:
                logger.error(f"n_paths={n_paths}: outputs differ between modes")

    if ideal_ms is None:
        # Reference cell when the sweep itself does not cover it.
        times, _ = _time_cell(_workload(spec, 1), ExecutionMode.SEQUENTIAL, spec)
        ideal_ms = float(np.median(times))

    result = BenchResult(identical_outputs=identical)
    for n_paths, mode, times in measured:
        p10, median, p90 = np.percentile(times, [10, 50, 90])
        result.rows.append(
            BenchRow(
                n_paths=n_paths,
                mode=mode,
                median_ms=float(median),
                p10_ms=float(p10),
                p90_ms=float(p90),
                ideal_ms=ideal_ms,
                cores=cores,
            )
        )
    return result
