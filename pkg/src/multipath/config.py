# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import enum
from typing import Any, Dict

from pydantic import BaseModel, ConfigDict, Field

from src.errors import ConfigError


class FixedWeightMode(str, enum.Enum):
    MEAN = "mean"  # 1/n, the plain multi-path row of the ablation ladder
    INV_SQRT = "inv_sqrt"  # 1/√n, PathNorm with fixed weights


class SublayerKind(str, enum.Enum):
    ATTENTION = "attention"
    FEED_FORWARD = "feed_forward"

    @property
    def short_name(self) -> str:
        return "attn" if self is SublayerKind.ATTENTION else "ffn"


class ExecutionMode(str, enum.Enum):
    SEQUENTIAL = "sequential"
    CONCURRENT = "concurrent"


class MultiPathConfig(BaseModel):
    """Architecture and ablation switches of one multi-path sublayer."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    n_paths: int = Field(1, ge=1, description="Paths per encoder sublayer")
    use_pathnorm: bool = Field(
        True, description="Normalize every feature before fusion"
    )
    use_learnable_weights: bool = Field(
        True, description="Learn alpha/beta instead of using fixed weights"
    )
    use_more_features: bool = Field(
        False, description="Add the n leave-one-out averages as new features"
    )
    fixed_weight_mode: FixedWeightMode = Field(
        FixedWeightMode.MEAN,
        description="Fixed alpha when learnable weights are off: 1/n or 1/√n",
    )

    @property
    def more_features_active(self) -> bool:
        """Combination is a no-op for one or two paths."""
        return self.use_more_features and self.n_paths >= 3

    @property
    def feature_count(self) -> int:
        return feature_count(self.n_paths, self.use_more_features)


def feature_count(n_paths: int, more_features: bool) -> int:
    """m = 2n when more features are on and n ≥ 3, otherwise n."""
    return 2 * n_paths if more_features and n_paths >= 3 else n_paths


# The ablation ladder, each row adding one mechanism to the previous one.
# "minus_pathnorm" is learnable weights without PathNorm.
ABLATION_PRESETS: Dict[str, Dict[str, Any]] = {
    "baseline": {
        "use_pathnorm": False,
        "use_learnable_weights": False,
        "use_more_features": False,
        "fixed_weight_mode": FixedWeightMode.MEAN,
    },
    "multi_path": {
        "use_pathnorm": False,
        "use_learnable_weights": False,
        "use_more_features": False,
        "fixed_weight_mode": FixedWeightMode.MEAN,
    },
    "pathnorm": {
        "use_pathnorm": True,
        "use_learnable_weights": False,
        "use_more_features": False,
        "fixed_weight_mode": FixedWeightMode.INV_SQRT,
    },
    "minus_pathnorm": {
        "use_pathnorm": False,
        "use_learnable_weights": True,
        "use_more_features": False,
    },
    "learnable_weights": {
        "use_pathnorm": True,
        "use_learnable_weights": True,
        "use_more_features": False,
    },
    "more_features": {
        "use_pathnorm": True,
        "use_learnable_weights": True,
        "use_more_features": True,
    },
}


def ablation_preset(name: str, n_paths: int) -> MultiPathConfig:
    """Build the MultiPathConfig of a named ablation row; ``baseline`` forces n=1."""
    if name not in ABLATION_PRESETS:
        raise ConfigError(
            f"unknown ablation preset '{name}'",
            [f"choose one of: {', '.join(ABLATION_PRESETS)}"],
        )
    if name == "baseline":
        n_paths = 1
    return MultiPathConfig(n_paths=n_paths, **ABLATION_PRESETS[name])
