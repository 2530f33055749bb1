# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

from src.autodiff import Tensor, average
from src.errors import ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Feature:
    """One fusion input tagged with the paths it came from."""

    tensor: Tensor
    origin: Tuple[int, ...]


@dataclass
class FeatureSet:
    """
    Raw features (one per path) followed by new features (one per subset).

    The order raw[0..n-1], new[omit 0 .. omit n-1] is the alpha order and is
    part of the checkpoint format.
    """

    raw: List[Feature]
    new: List[Feature] = field(default_factory=list)

    def __post_init__(self) -> None:
        entries = self.raw + self.new
        if not self.raw:
            raise ShapeError("feature set needs at least one raw feature")
        first = entries[0].tensor.shape
        for entry in entries[1:]:
            if entry.tensor.shape != first:
                raise ShapeError(
                    f"feature shapes differ: {first} vs {entry.tensor.shape}"
                )

    def __len__(self) -> int:
        return len(self.raw) + len(self.new)

    def tensors(self) -> List[Tensor]:
        return [f.tensor for f in self.raw + self.new]

    def origins(self) -> List[Tuple[int, ...]]:
        return [f.origin for f in self.raw + self.new]

    def map(self, fn: Callable[[int, Tensor], Tensor]) -> "FeatureSet":
        """Apply ``fn(position, tensor)`` to every entry, keeping the tags."""
        n_raw = len(self.raw)
        return FeatureSet(
            raw=[Feature(fn(i, f.tensor), f.origin) for i, f in enumerate(self.raw)],
            new=[
                Feature(fn(n_raw + i, f.tensor), f.origin)
                for i, f in enumerate(self.new)
            ],
        )


def select_subsets(n: int) -> List[Tuple[int, ...]]:
    """
    Leave-one-out subsets of the path indices 0..n−1.

    Subset i omits path i; subsets come in ascending omitted-index order.
    For n = 1 the single subset is empty, which the combination step treats
    as a no-op.
    """
    if n < 1:
        raise ValueError(f"need at least one path, got n={n}")
    paths = range(n)
    return [tuple(j for j in paths if j != i) for i in paths]


def combine_avg(outputs: Sequence[Tensor]) -> Tensor:
    """Elementwise mean of the given (pre-PathNorm) path outputs."""
    if not outputs:
        raise ShapeError("combine_avg: empty list of outputs")
    return average(list(outputs))


def build_feature_set(
    func_outputs: Sequence[Tensor], more_features: bool
) -> FeatureSet:
    """
    Turn n raw Func outputs into the fusion inputs.

    With ``more_features`` and n ≥ 3 the n leave-one-out averages are appended
    as new features; for n ≤ 2 nothing is added.
    """
    n = len(func_outputs)
    raw = [Feature(t, (i,)) for i, t in enumerate(func_outputs)]
    if not more_features or n < 3:
        return FeatureSet(raw=raw)
    new = [
        Feature(combine_avg([func_outputs[j] for j in subset]), subset)
        for subset in select_subsets(n)
    ]
    return FeatureSet(raw=raw, new=new)
