# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from .app import build_parser, main

__all__ = ["build_parser", "main"]
