# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import pytest

from src.model import ModelConfig
from src.multipath import MultiPathConfig, shutdown_executor


def tiny_config(
    n_paths: int = 2,
    enc_depth: int = 1,
    dec_depth: int = 0,
    d_model: int = 8,
    heads: int = 2,
    vocab_size: int = 8,
    seed: int = 0,
    **multipath,
) -> ModelConfig:
    return ModelConfig(
        enc_depth=enc_depth,
        dec_depth=dec_depth,
        d_model=d_model,
        heads=heads,
        vocab_size=vocab_size,
        seed=seed,
        multipath=MultiPathConfig(n_paths=n_paths, **multipath),
    )


@pytest.fixture
def tiny_cfg() -> ModelConfig:
    return tiny_config()


@pytest.fixture(autouse=True, scope="session")
def _stop_path_executor():
    yield
    shutdown_executor()
