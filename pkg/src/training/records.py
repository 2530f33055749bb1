# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import logging
from pathlib import Path
from typing import IO, Iterable, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from src.utils.json_utils import append_line, read_lines

logger = logging.getLogger(__name__)


class RunRecord(BaseModel):
    """One logging interval of a training run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    step: int = Field(..., ge=1, description="Last optimizer step of the interval")
    loss: float = Field(..., description="Mean cross-entropy over the interval")
    acc: float = Field(..., ge=0.0, le=1.0, description="Token accuracy")
    lr: float = Field(..., ge=0.0, description="Learning rate of the last step")
    wall_ms: float = Field(0.0, ge=0.0, description="Wall time of the interval")


class RecordWriter:
    """Line-atomic JSONL sink; usable as a context manager."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh: Optional[IO[str]] = open(self.path, "w", encoding="utf-8")

    def write(self, record: RunRecord) -> None:
        if self._fh is None:
            raise ValueError(f"record writer for {self.path} is closed")
        append_line(self._fh, record.model_dump())

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "RecordWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_records(path: Union[str, Path], records: Iterable[RunRecord]) -> int:
    count = 0
    with RecordWriter(path) as writer:
        for record in records:
            writer.write(record)
            count += 1
    return count


def read_records(path: Union[str, Path]) -> List[RunRecord]:
    return [RunRecord.model_validate(obj) for obj in read_lines(path)]
