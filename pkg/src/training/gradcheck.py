# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.autodiff import (
    Tape,
    Tensor,
    backward,
    cross_entropy,
    finite_diff_grad,
    no_grad,
    relative_error,
)
from src.errors import ModelTooLargeError
from src.model import Model, ModelConfig, build_model

logger = logging.getLogger(__name__)

GRAD_GROUPS = (
    "embeddings",
    "attn_paths",
    "ffn_paths",
    "pathnorm",
    "pre_ln",
    "alpha",
    "beta",
    "final_ln",
    "decoder",
)

DEFAULT_MAX_PARAMS = 5000

_ENCODER_NAME = re.compile(r"^enc\.\d+\.(attn|ffn)\.([a-z_]+?)\d*(\.|$)")


def grad_group(name: str) -> str:
    """Reporting group of a canonical parameter name."""
    if name.startswith("embed.") or name == "out_proj":
        return "embeddings"
    if name.startswith("dec."):
        return "decoder"
    if name.startswith("enc.final_ln."):
        return "final_ln"
    match = _ENCODER_NAME.match(name)
    if match is None:
        raise ValueError(f"unrecognized parameter name '{name}'")
    kind, part = match.group(1), match.group(2)
    if part == "path":
        return f"{kind}_paths"
    if part in ("pathnorm", "pre_ln", "alpha", "beta"):
        return part
    raise ValueError(f"unrecognized parameter name '{name}'")


@dataclass
class GradCheckReport:
    tol: float
    groups: Dict[str, float] = field(default_factory=dict)
    tensors: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(err < self.tol for err in self.groups.values())

    def failing_groups(self) -> List[str]:
        return [name for name, err in self.groups.items() if not err < self.tol]

    def rows(self) -> List[Tuple[str, float, bool]]:
        return [(name, err, err < self.tol) for name, err in self.groups.items()]

    def to_text(self) -> str:
        lines = [f"{'group':<12} {'max_rel_err':>12}  status"]
        for name, err, ok in self.rows():
            lines.append(f"{name:<12} {err:>12.3e}  {'ok' if ok else 'FAIL'}")
        lines.append(f"tol={self.tol:g} result={'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


@dataclass
class CheckBatch:
    srcs: List[List[int]]
    tgts: Optional[List[List[int]]]
    targets: np.ndarray


def make_check_batch(
    cfg: ModelConfig, lengths: Sequence[int] = (3, 4), seed: Optional[int] = None
) -> CheckBatch:
    """A small fixed random batch: two sequences, random ids and labels."""
    rng = np.random.default_rng(cfg.seed + 1 if seed is None else seed)
    vocab = cfg.vocab_size
    srcs = [rng.integers(0, vocab, size=n).tolist() for n in lengths]
    if cfg.encoder_only:
        return CheckBatch(srcs, None, rng.integers(0, vocab, size=sum(lengths)))
    tgt_lengths = [max(1, n - 1) for n in lengths]
    tgts = [rng.integers(0, vocab, size=n).tolist() for n in tgt_lengths]
    return CheckBatch(srcs, tgts, rng.integers(0, vocab, size=sum(tgt_lengths)))


def _loss(model: Model, batch: CheckBatch) -> Tensor:
    return cross_entropy(model.forward_batch(batch.srcs, batch.tgts), batch.targets)


def check_model_grads(
    model: Model, batch: CheckBatch, tol: float, h: float = 1e-5
) -> GradCheckReport:
    """Compare backward grads of ``model`` against central differences."""
    params = model.named_parameters()
    model.zero_grad()
    with Tape():
        backward(_loss(model, batch))
    analytic = {
        name: np.zeros(t.shape) if t.grad is None else t.grad.copy()
        for name, t in params.items()
    }

    report = GradCheckReport(tol=tol)
    for name, t in params.items():

        def f(_: Tensor) -> float:
            with no_grad():
                return _loss(model, batch).item()

        numeric = finite_diff_grad(f, t, h=h)
        err = relative_error(analytic[name], numeric.data)
        report.tensors[name] = err
        group = grad_group(name)
        report.groups[group] = max(report.groups.get(group, 0.0), err)
        logger.debug(f"gradcheck {name} shape={t.shape}: rel_err={err:.3e}")
    report.groups = {g: report.groups[g] for g in GRAD_GROUPS if g in report.groups}
    for group in report.failing_groups():
        logger.warning(
            f"Gradient check failed for group '{group}': "
            f"{report.groups[group]:.3e} >= tol {tol:g}"
        )
    return report


def grad_check_model(
    cfg: ModelConfig,
    tol: float = 1e-4,
    max_params: int = DEFAULT_MAX_PARAMS,
    h: float = 1e-5,
) -> GradCheckReport:
    """
    Whole-model gradient check on a fixed random batch.

    Raises:
        ModelTooLargeError: The model has more than ``max_params`` trainable
            values; finite differences would take too long.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    model = build_model(cfg)
    total = sum(t.size for t in model.parameters())
    if total > max_params:
        raise ModelTooLargeError(
            f"model has {total} trainable values, gradient check is limited to "
            f"{max_params}; shrink d_model, vocab_size or depth"
        )
    logger.info(f"Gradient check: {total} trainable values, tol={tol:g}")
    return check_model_grads(model, make_check_batch(cfg), tol, h=h)
