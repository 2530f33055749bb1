# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

"""
Exact parameter accounting.

The closed-form count is kept separate from the built model on purpose:
tests compare the two over many configs.
"""

import re
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from src.nn import FFN_EXPANSION

from .config import ModelConfig
from .model import Model

PARAM_GROUPS = ("path_weights", "norms", "fusion_weights", "embeddings", "decoder")

_PATH_WEIGHT = re.compile(r"^enc\.\d+\.(attn|ffn)\.path\d+\.")


def attention_path_size(d: int) -> int:
    return 3 * d * d


def ffn_path_size(d: int) -> int:
    hidden = FFN_EXPANSION * d
    return d * hidden + hidden + hidden * d + d


def layer_norm_size(d: int) -> int:
    return 2 * d


@dataclass
class ParamBreakdown:
    groups: Dict[str, int] = field(
        default_factory=lambda: {name: 0 for name in PARAM_GROUPS}
    )

    @property
    def total(self) -> int:
        return sum(self.groups.values())

    def rows(self) -> List[Tuple[str, int]]:
        return [(name, self.groups[name]) for name in PARAM_GROUPS]

    def overhead_fraction(self) -> float:
        """Share of the total taken by norms and fusion weights."""
        total = self.total
        if not total:
            return 0.0
        return (self.groups["norms"] + self.groups["fusion_weights"]) / total


def param_count(cfg: ModelConfig) -> ParamBreakdown:
    """Closed-form parameter count of ``build_model(cfg)``, split by group."""
    d, depth, vocab = cfg.d_model, cfg.enc_depth, cfg.vocab_size
    mp = cfg.multipath
    n, m = mp.n_paths, mp.feature_count

    groups = {name: 0 for name in PARAM_GROUPS}
    groups["path_weights"] = depth * n * (attention_path_size(d) + ffn_path_size(d))

    sublayers = 2 * depth
    norms = sublayers * layer_norm_size(d) + layer_norm_size(d)
    if mp.use_pathnorm:
        norms += sublayers * m * layer_norm_size(d)
    groups["norms"] = norms

    if mp.use_learnable_weights:
        groups["fusion_weights"] = sublayers * (m + 1)

    embeddings = vocab * d
    if not cfg.share_embeddings:
        embeddings += d * vocab
        if not cfg.encoder_only:
            embeddings += vocab * d
    groups["embeddings"] = embeddings

    if not cfg.encoder_only:
        per_layer = (
            3 * layer_norm_size(d) + 2 * attention_path_size(d) + ffn_path_size(d)
        )
        groups["decoder"] = cfg.dec_depth * per_layer + layer_norm_size(d)
    return ParamBreakdown(groups)


def group_of(name: str) -> str:
    """Accounting group of a canonical parameter name."""
    if name.startswith("embed.") or name == "out_proj":
        return "embeddings"
    if name.startswith("dec."):
        return "decoder"
    if _PATH_WEIGHT.match(name):
        return "path_weights"
    if name.endswith(".alpha") or name.endswith(".beta"):
        return "fusion_weights"
    return "norms"


def enumerate_params(model: Model) -> ParamBreakdown:
    """Count the registered trainable parameters of a built model."""
    breakdown = ParamBreakdown()
    for name, t in model.named_parameters().items():
        breakdown.groups[group_of(name)] += t.size
    return breakdown
