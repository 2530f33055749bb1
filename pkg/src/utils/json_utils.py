# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import json
import logging
from pathlib import Path
from typing import IO, Any, Dict, List, Union

logger = logging.getLogger(__name__)


def dump_line(obj: Dict[str, Any]) -> str:
    """Compact, key-ordered JSON followed by a newline."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False) + "\n"


def append_line(fh: IO[str], obj: Dict[str, Any]) -> None:
    """
    Write one JSONL record with a single ``write`` and flush it.

    A killed process therefore leaves complete lines plus at most one
    truncated trailing line, which ``read_lines`` drops.
    """
    fh.write(dump_line(obj))
    fh.flush()


def read_lines(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """
    Parse a JSONL file, tolerating a truncated last line.

    Args:
        path: File to read.

    Returns:
        List[Dict[str, Any]]: One dict per complete record.

    Raises:
        ValueError: A line other than the last one is not valid JSON.
    """
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().split("\n")
    records = []
    for index, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            if index == len(lines) - 1:
                logger.warning(f"Ignoring truncated trailing record in {path}: {e}")
                break
            raise ValueError(f"{path}:{index + 1}: invalid JSON record: {e}")
    return records
