# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

"""
Entry point script for the multipath-transformer toolkit.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
