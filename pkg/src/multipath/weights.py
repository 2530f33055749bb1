# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import math
from typing import Sequence, Tuple, Union

import numpy as np

from src.autodiff import Tensor, weighted_fusion
from src.errors import ShapeError

from .config import FixedWeightMode, feature_count
from .features import FeatureSet


def init_weights(n_raw: int, more_features: bool) -> Tuple[Tensor, Tensor]:
    """
    Learnable fusion weights at initialization.

    Every alpha entry is 1/√(2·n_raw), where n_raw counts raw features only,
    and beta is 1.
    """
    if n_raw < 1:
        raise ValueError(f"n_raw must be at least 1, got {n_raw}")
    m = feature_count(n_raw, more_features)
    alpha = Tensor(np.full(m, 1.0 / math.sqrt(2 * n_raw)), requires_grad=True)
    beta = Tensor(1.0, requires_grad=True)
    return alpha, beta


def fixed_weights(
    n_raw: int, more_features: bool, mode: FixedWeightMode
) -> Tuple[Tensor, Tensor]:
    """Frozen weights for the ablations: alpha = 1/n or 1/√n, beta = 1."""
    m = feature_count(n_raw, more_features)
    value = 1.0 / n_raw if mode is FixedWeightMode.MEAN else 1.0 / math.sqrt(n_raw)
    return Tensor(np.full(m, value)), Tensor(1.0)


def fuse(
    x: Tensor,
    features: Union[FeatureSet, Sequence[Tensor]],
    alpha: Tensor,
    beta: Tensor,
) -> Tensor:
    """β·x + Σ αᵢ·featureᵢ with raw features first, then new features."""
    tensors = features.tensors() if isinstance(features, FeatureSet) else list(features)
    if alpha.shape != (len(tensors),):
        raise ShapeError(
            f"fuse: alpha of length {alpha.shape} for {len(tensors)} features"
        )
    return weighted_fusion(x, alpha, beta, tensors)
