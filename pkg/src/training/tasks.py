# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

"""
Synthetic sequence tasks.

Ids 0, 1 and 2 are reserved for pad, bos and eos; content tokens are drawn
uniformly from 3..vocab-1. Seq2seq batches feed ``[bos] + y`` to the decoder
and score ``y + [eos]``; encoder-only batches score ``y`` position by
position against the source.
"""

import enum
import logging
from dataclasses import dataclass
from typing import Iterator, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = logging.getLogger(__name__)

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
FIRST_CONTENT_ID = 3


class TaskKind(str, enum.Enum):
    COPY = "copy"
    REVERSE = "reverse"


class TaskSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: TaskKind = Field(TaskKind.COPY, description="copy or reverse")
    vocab: int = Field(16, ge=4, description="Vocabulary size including specials")
    min_len: int = Field(5, ge=2, description="Shortest source sequence")
    max_len: int = Field(10, ge=2, description="Longest source sequence")
    samples_per_epoch: int = Field(
        4096, ge=1, description="Size of the example pool reshuffled each epoch"
    )
    seed: int = Field(0, description="Seed of example generation and shuffling")

    @model_validator(mode="after")
    def _check_lengths(self) -> "TaskSpec":
        if self.min_len > self.max_len:
            raise ValueError(
                f"min_len ({self.min_len}) must not exceed max_len ({self.max_len})"
            )
        return self


@dataclass(frozen=True)
class Example:
    src: List[int]
    target: List[int]


@dataclass
class Batch:
    srcs: List[List[int]]
    tgt_in: List[List[int]]
    tgt_out: np.ndarray

    def __len__(self) -> int:
        return len(self.srcs)


def target_of(src: List[int], kind: TaskKind) -> List[int]:
    return list(src) if kind is TaskKind.COPY else list(reversed(src))


def make_examples(spec: TaskSpec) -> List[Example]:
    """The deterministic example pool of ``spec``."""
    rng = np.random.default_rng(spec.seed)
    examples = []
    for _ in range(spec.samples_per_epoch):
        length = int(rng.integers(spec.min_len, spec.max_len + 1))
        src = rng.integers(FIRST_CONTENT_ID, spec.vocab, size=length).tolist()
        examples.append(Example(src=src, target=target_of(src, spec.kind)))
    return examples


def make_batch(examples: List[Example], encoder_only: bool) -> Batch:
    srcs = [ex.src for ex in examples]
    if encoder_only:
        targets = np.concatenate([ex.target for ex in examples]).astype(np.int64)
        return Batch(srcs=srcs, tgt_in=[], tgt_out=targets)
    tgt_in = [[BOS_ID] + ex.target for ex in examples]
    tgt_out = np.concatenate([ex.target + [EOS_ID] for ex in examples])
    return Batch(srcs=srcs, tgt_in=tgt_in, tgt_out=tgt_out.astype(np.int64))


def iterate_batches(
    spec: TaskSpec, batch_size: int, encoder_only: bool = False
) -> Iterator[Batch]:
    """
    Endless stream of batches.

    Each epoch visits the pool in a fresh permutation drawn from
    ``(seed, epoch)``; a trailing partial batch is carried into the next epoch.
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    pool = make_examples(spec)
    pending: List[Example] = []
    epoch = 0
    while True:
        order = np.random.default_rng([spec.seed, epoch]).permutation(len(pool))
        logger.debug(f"Task {spec.kind.value}: starting epoch {epoch}")
        for index in order:
            pending.append(pool[int(index)])
            if len(pending) == batch_size:
                yield make_batch(pending, encoder_only)
                pending = []
        epoch += 1
