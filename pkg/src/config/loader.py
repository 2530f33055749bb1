# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
import os
from pathlib import Path
from typing import Any, Dict, Union

import yaml

from src.errors import ConfigError

logger = logging.getLogger(__name__)


def replace_env_vars(value: str) -> str:
    """Replace ``$NAME`` string values by the environment variable, if set."""
    if not isinstance(value, str):
        return value
    if value.startswith("$"):
        env_var = value[1:]
        return os.getenv(env_var, value)
    return value


def process_value(value: Any) -> Any:
    if isinstance(value, dict):
        return process_dict(value)
    if isinstance(value, list):
        return [process_value(v) for v in value]
    if isinstance(value, str):
        return replace_env_vars(value)
    return value


def process_dict(config: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively process dictionary to replace environment variables."""
    return {key: process_value(value) for key, value in config.items()}


def load_yaml_config(file_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load and process a YAML configuration file.

    A missing file gives ``{}``. Unreadable YAML raises ``ConfigError`` with
    the line and column of the problem.
    """
    if not os.path.exists(file_path):
        return {}

    try:
        with open(file_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "?"
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"cannot parse {file_path}", [f"{where}: {problem}"]) from e

    if config is None:
        config = {}
    if not isinstance(config, dict):
        raise ConfigError(
            f"{file_path} must contain a mapping at the top level",
            [f"got {type(config).__name__}"],
        )
    logger.debug(f"Loaded config file {file_path}")
    return process_dict(config)
