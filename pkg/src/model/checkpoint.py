# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

"""
Checkpoint format.

A checkpoint is one JSON document::

    {"format": "multipath-transformer/checkpoint", "schema_version": 1,
     "step": 1200, "model_config": {...},
     "params": {"enc.0.attn.path0.w_q": {"shape": [8, 8], "data": [...]}, ...}}

``params`` holds every trainable tensor under its canonical name, in model
creation order, as a flat row-major list. Floats are written with their
shortest round-tripping repr, so identical parameters give identical bytes.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import ValidationError

from src.errors import CheckpointError

from .config import ModelConfig
from .model import Model, build_model

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "multipath-transformer/checkpoint"
CHECKPOINT_SCHEMA_VERSION = 1


def checkpoint_dict(model: Model, step: Optional[int] = None) -> Dict[str, Any]:
    return {
        "format": CHECKPOINT_FORMAT,
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "step": step,
        "model_config": model.cfg.model_dump(mode="json"),
        "params": {
            name: {"shape": list(t.shape), "data": t.data.reshape(-1).tolist()}
            for name, t in model.named_parameters().items()
        },
    }


def save_checkpoint(
    model: Model, path: Union[str, Path], step: Optional[int] = None
) -> Path:
    """Write atomically: a partially written file never replaces a good one."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(checkpoint_dict(model, step), f, separators=(",", ":"))
        f.write("\n")
    os.replace(tmp, path)
    logger.info(f"Saved checkpoint to {path}")
    return path


def load_state(model: Model, params: Dict[str, Dict[str, Any]]) -> None:
    """Copy serialized arrays into ``model``; names and shapes must match exactly."""
    expected = model.named_parameters()
    missing = sorted(set(expected) - set(params))
    unexpected = sorted(set(params) - set(expected))
    if missing or unexpected:
        raise CheckpointError(
            f"parameter names differ: missing={missing[:5]} "
            f"unexpected={unexpected[:5]}"
        )
    for name, t in expected.items():
        entry = params[name]
        shape = tuple(entry.get("shape", ()))
        data = np.asarray(entry.get("data", []), dtype=np.float64)
        if shape != t.shape or data.size != t.size:
            raise CheckpointError(
                f"{name}: checkpoint shape {shape} does not match model {t.shape}"
            )
        t.data[...] = data.reshape(shape)


def read_checkpoint(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}")
    except json.JSONDecodeError as e:
        raise CheckpointError(f"checkpoint {path} is not valid JSON: {e}")
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    if doc.get("schema_version") != CHECKPOINT_SCHEMA_VERSION:
        raise CheckpointError(
            f"{path} has schema_version {doc.get('schema_version')}, "
            f"expected {CHECKPOINT_SCHEMA_VERSION}"
        )
    return doc


def load_checkpoint(path: Union[str, Path]) -> Model:
    """Rebuild the model from the embedded config, then load its parameters."""
    doc = read_checkpoint(path)
    try:
        cfg = ModelConfig.model_validate(doc["model_config"])
    except (KeyError, ValidationError) as e:
        raise CheckpointError(f"{path}: invalid model_config: {e}")
    model = build_model(cfg)
    load_state(model, doc.get("params", {}))
    logger.info(f"Loaded checkpoint {path} (step={doc.get('step')})")
    return model
