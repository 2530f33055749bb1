# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, List, Optional, Union

import numpy as np

from src.autodiff import Tensor
from src.errors import ConfigError
from src.nn import (
    AttentionParams,
    FfnParams,
    LayerNormParams,
    ffn,
    init_attention,
    init_ffn,
    init_layer_norm,
    layer_norm,
    mha,
)

from .config import ExecutionMode, MultiPathConfig, SublayerKind
from .execution import run_paths
from .features import build_feature_set
from .weights import fixed_weights, fuse, init_weights

logger = logging.getLogger(__name__)

PathParams = Union[AttentionParams, FfnParams]
PathFunc = Callable[[Tensor, PathParams], Tensor]


@dataclass
class MultiPathParams:
    """
    Parameters of one multi-path sublayer.

    ``pathnorm_params`` holds one LayerNorm per fused feature when PathNorm is
    enabled and is empty otherwise. ``alpha``/``beta`` are plain constants
    (``requires_grad=False``) when learnable weights are disabled.
    """

    path_params: List[PathParams]
    pathnorm_params: List[LayerNormParams]
    alpha: Tensor
    beta: Tensor
    pre_ln: LayerNormParams

    def check(self, cfg: MultiPathConfig, kind: SublayerKind) -> None:
        expected_type = AttentionParams if kind is SublayerKind.ATTENTION else FfnParams
        problems = []
        if len(self.path_params) != cfg.n_paths:
            problems.append(
                f"{len(self.path_params)} path bundles for n_paths={cfg.n_paths}"
            )
        if any(not isinstance(p, expected_type) for p in self.path_params):
            problems.append(f"path bundles must all be {expected_type.__name__}")
        m = cfg.feature_count
        if self.alpha.shape != (m,):
            problems.append(f"alpha has shape {self.alpha.shape}, expected ({m},)")
        if self.beta.size != 1:
            problems.append(f"beta must be a scalar, got shape {self.beta.shape}")
        n_norms = m if cfg.use_pathnorm else 0
        if len(self.pathnorm_params) != n_norms:
            problems.append(
                f"{len(self.pathnorm_params)} PathNorm sets, expected {n_norms}"
            )
        if problems:
            raise ConfigError("multipath parameters do not match config", problems)

    def named_tensors(self) -> Dict[str, Tensor]:
        """Canonical names relative to the sublayer, e.g. ``path0.w_q``."""
        named: Dict[str, Tensor] = {}
        for key, t in self.pre_ln.named_tensors().items():
            named[f"pre_ln.{key}"] = t
        for i, p in enumerate(self.path_params):
            for key, t in p.named_tensors().items():
                named[f"path{i}.{key}"] = t
        for j, pn in enumerate(self.pathnorm_params):
            for key, t in pn.named_tensors().items():
                named[f"pathnorm{j}.{key}"] = t
        named["alpha"] = self.alpha
        named["beta"] = self.beta
        return named


def init_multipath_params(
    kind: SublayerKind,
    d_model: int,
    heads: int,
    cfg: MultiPathConfig,
    rng: np.random.Generator,
) -> MultiPathParams:
    if kind is SublayerKind.ATTENTION:
        paths: List[PathParams] = [
            init_attention(d_model, heads, rng) for _ in range(cfg.n_paths)
        ]
    else:
        paths = [init_ffn(d_model, rng) for _ in range(cfg.n_paths)]
    m = cfg.feature_count
    norms = [init_layer_norm(d_model) for _ in range(m)] if cfg.use_pathnorm else []
    if cfg.use_learnable_weights:
        alpha, beta = init_weights(cfg.n_paths, cfg.use_more_features)
    else:
        alpha, beta = fixed_weights(
            cfg.n_paths, cfg.use_more_features, cfg.fixed_weight_mode
        )
    return MultiPathParams(
        path_params=paths,
        pathnorm_params=norms,
        alpha=alpha,
        beta=beta,
        pre_ln=init_layer_norm(d_model),
    )


def path_function(
    kind: SublayerKind, mask: Optional[np.ndarray] = None
) -> PathFunc:
    """Func of one path: MHA (with optional mask) or FFN."""
    if kind is SublayerKind.ATTENTION:
        return lambda x, p: mha(x, p, mask=mask)
    return ffn


def path_forward(
    normed: Tensor,
    func: PathFunc,
    p: PathParams,
    pn: Optional[LayerNormParams],
    cfg: MultiPathConfig,
) -> Tensor:
    """
    PathNorm(Func(LN(x))) for one path.

    ``normed`` is the sublayer's shared LN(x); the same tensor feeds every
    path. With PathNorm disabled this is Func(LN(x)).
    """
    out = func(normed, p)
    if cfg.use_pathnorm:
        if pn is None:
            raise ConfigError("PathNorm is enabled but no PathNorm parameters given")
        out = layer_norm(out, pn)
    return out


def multipath_sublayer(
    x: Tensor,
    kind: SublayerKind,
    params: MultiPathParams,
    cfg: MultiPathConfig,
    mode: ExecutionMode = ExecutionMode.SEQUENTIAL,
    mask: Optional[np.ndarray] = None,
) -> Tensor:
    """
    Full multi-path sublayer.

    Shared pre-LN, n independent Func evaluations (concurrent when ``mode``
    says so), optional leave-one-out averages, PathNorm on every feature and
    the weighted fusion β·x + Σ αᵢ·featureᵢ.
    """
    params.check(cfg, kind)
    normed = layer_norm(x, params.pre_ln)
    func = path_function(kind, mask)
    outputs = run_paths([partial(func, normed, p) for p in params.path_params], mode)
    features = build_feature_set(outputs, cfg.more_features_active)
    if cfg.use_pathnorm:
        features = features.map(
            lambda j, t: layer_norm(t, params.pathnorm_params[j])
        )
    return fuse(x, features, params.alpha, params.beta)
