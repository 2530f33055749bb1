# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.bench import BenchSpec
from src.errors import ConfigError
from src.model import ModelConfig
from src.multipath import ablation_preset
from src.training import ScheduleConfig, TaskSpec, TrainConfig

from .loader import load_yaml_config

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_OUTPUT_ROOT = "./outputs"


def default_output_root() -> Path:
    return Path(os.getenv("MULTIPATH_OUTPUT_ROOT", DEFAULT_OUTPUT_ROOT))


class RunConfig(BaseModel):
    """Everything one CLI invocation needs, validated as a whole."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    schema_version: Literal[1] = Field(
        SCHEMA_VERSION, description="Config schema version"
    )
    model: Optional[ModelConfig] = Field(
        None, description="Required by every command except bench"
    )
    ablation: Optional[str] = Field(
        None, description="Named ablation row replacing model.multipath switches"
    )
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    task: TaskSpec = Field(default_factory=TaskSpec)
    train: TrainConfig = Field(default_factory=TrainConfig)
    bench: Optional[BenchSpec] = None
    output_dir: Optional[Path] = Field(
        None, description="Run directory; defaults under MULTIPATH_OUTPUT_ROOT"
    )

    @model_validator(mode="before")
    @classmethod
    def _apply_ablation(cls, data: Any) -> Any:
        if not isinstance(data, dict) or not data.get("ablation"):
            return data
        if not data.get("model"):
            return data
        model = dict(data["model"])
        multipath = dict(model.get("multipath") or {})
        preset = ablation_preset(data["ablation"], int(multipath.get("n_paths", 1)))
        model["multipath"] = preset.model_dump()
        return {**data, "model": model}

    def require_model(self) -> ModelConfig:
        if self.model is None:
            raise ConfigError("config has no 'model' section")
        return self.model

    def resolved_output_dir(self, name: str) -> Path:
        if self.output_dir is not None:
            return self.output_dir
        return default_output_root() / name


def _diagnostics(error: ValidationError) -> List[str]:
    return [
        f"{'.'.join(str(p) for p in item['loc']) or '<root>'}: {item['msg']}"
        for item in error.errors()
    ]


def parse_run_config(data: Dict[str, Any], source: str = "<config>") -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid config {source}", _diagnostics(e)) from e


def load_run_config(
    path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """
    Load, merge and validate a run config file.

    Args:
        path: YAML file.
        overrides: Dotted keys (``model.seed``) applied on top of the file.

    Raises:
        ConfigError: The file is missing, unparsable or invalid.
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    data = load_yaml_config(path)
    for dotted, value in (overrides or {}).items():
        set_dotted(data, dotted, value)
    config = parse_run_config(data, str(path))
    logger.info(f"Loaded run config {path}")
    return config


def set_dotted(data: Dict[str, Any], dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            child = node[key] = {}
        node = child
    node[keys[-1]] = value
