# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from dotenv import load_dotenv

from .configuration import (
    SCHEMA_VERSION,
    RunConfig,
    default_output_root,
    load_run_config,
    parse_run_config,
    set_dotted,
)
from .loader import load_yaml_config

# Load environment variables
load_dotenv()

__all__ = [
    "SCHEMA_VERSION",
    "RunConfig",
    "default_output_root",
    "load_run_config",
    "parse_run_config",
    "set_dotted",
    "load_yaml_config",
]
