# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.multipath import MultiPathConfig


class ModelConfig(BaseModel):
    """Full architectural description: multi-path encoder, optional decoder."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    enc_depth: int = Field(..., ge=1, description="Encoder layers")
    dec_depth: int = Field(
        0, ge=0, description="Decoder layers; 0 selects the encoder-only head"
    )
    d_model: int = Field(..., ge=1, description="Embedding width d")
    heads: int = Field(1, ge=1, description="Attention heads, must divide d")
    vocab_size: int = Field(..., ge=1, description="Shared vocabulary size")
    multipath: MultiPathConfig = Field(default_factory=MultiPathConfig)
    share_embeddings: bool = Field(
        True, description="Tie source/target embeddings and the output projection"
    )
    seed: int = Field(0, description="Seed for deterministic initialization")

    @model_validator(mode="after")
    def _heads_divide_width(self) -> "ModelConfig":
        if self.d_model % self.heads != 0:
            raise ValueError(
                f"heads={self.heads} must divide d_model={self.d_model}"
            )
        return self

    @property
    def n_paths(self) -> int:
        return self.multipath.n_paths

    @property
    def encoder_only(self) -> bool:
        return self.dec_depth == 0
