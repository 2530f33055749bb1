# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.autodiff import Tensor, add, matmul, transpose
from src.nn import (
    AttentionParams,
    FfnParams,
    LayerNormParams,
    block_mask,
    check_token_ids,
    embed_and_position,
    ffn,
    init_attention,
    init_ffn,
    init_layer_norm,
    layer_norm,
    mha,
    xavier_uniform,
)
from src.multipath import (
    ExecutionMode,
    MultiPathParams,
    SublayerKind,
    init_multipath_params,
    multipath_sublayer,
)

from .config import ModelConfig

logger = logging.getLogger(__name__)

TokenSeq = Sequence[int]


@dataclass
class EncoderLayer:
    attn: MultiPathParams
    ffn: MultiPathParams

    def sublayers(self) -> Iterator[Tuple[SublayerKind, MultiPathParams]]:
        yield SublayerKind.ATTENTION, self.attn
        yield SublayerKind.FEED_FORWARD, self.ffn


@dataclass
class DecoderLayer:
    """Standard single-path pre-norm decoder layer."""

    self_ln: LayerNormParams
    self_attn: AttentionParams
    cross_ln: LayerNormParams
    cross_attn: AttentionParams
    ffn_ln: LayerNormParams
    ffn: FfnParams

    def named_tensors(self) -> Dict[str, Tensor]:
        named: Dict[str, Tensor] = {}
        for prefix, ln, block in (
            ("self_attn", self.self_ln, self.self_attn),
            ("cross_attn", self.cross_ln, self.cross_attn),
            ("ffn", self.ffn_ln, self.ffn),
        ):
            for key, t in ln.named_tensors().items():
                named[f"{prefix}.ln.{key}"] = t
            for key, t in block.named_tensors().items():
                named[f"{prefix}.{key}"] = t
        return named


def _packed_ids(
    seqs: Sequence[TokenSeq],
) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    lengths = [len(s) for s in seqs]
    ids = np.fromiter(itertools.chain.from_iterable(seqs), dtype=np.int64)
    positions = np.fromiter(
        itertools.chain.from_iterable(range(n) for n in lengths), dtype=np.int64
    )
    return ids, positions, lengths


class Model:
    """
    Multi-path encoder with an optional standard decoder.

    Sequences of a batch are packed along rows; block-diagonal masks keep
    them from attending to each other.
    """

    def __init__(
        self,
        cfg: ModelConfig,
        src_embed: Tensor,
        enc_layers: List[EncoderLayer],
        enc_final_ln: LayerNormParams,
        tgt_embed: Optional[Tensor] = None,
        dec_layers: Optional[List[DecoderLayer]] = None,
        dec_final_ln: Optional[LayerNormParams] = None,
        out_proj: Optional[Tensor] = None,
    ):
        self.cfg = cfg
        self.src_embed = src_embed
        self.enc_layers = enc_layers
        self.enc_final_ln = enc_final_ln
        self.tgt_embed = tgt_embed
        self.dec_layers = dec_layers or []
        self.dec_final_ln = dec_final_ln
        self.out_proj = out_proj

    def named_tensors(self) -> Dict[str, Tensor]:
        """Every tensor under its canonical name, in creation order."""
        named: Dict[str, Tensor] = {"embed.src": self.src_embed}
        if self.tgt_embed is not None:
            named["embed.tgt"] = self.tgt_embed
        for layer_index, layer in enumerate(self.enc_layers):
            for kind, params in layer.sublayers():
                prefix = f"enc.{layer_index}.{kind.short_name}"
                for key, t in params.named_tensors().items():
                    named[f"{prefix}.{key}"] = t
        for key, t in self.enc_final_ln.named_tensors().items():
            named[f"enc.final_ln.{key}"] = t
        for layer_index, layer in enumerate(self.dec_layers):
            for key, t in layer.named_tensors().items():
                named[f"dec.{layer_index}.{key}"] = t
        if self.dec_final_ln is not None:
            for key, t in self.dec_final_ln.named_tensors().items():
                named[f"dec.final_ln.{key}"] = t
        if self.out_proj is not None:
            named["out_proj"] = self.out_proj
        return named

    def named_parameters(self) -> Dict[str, Tensor]:
        """Trainable tensors only; frozen ablation weights are excluded."""
        return {k: t for k, t in self.named_tensors().items() if t.requires_grad}

    def parameters(self) -> List[Tensor]:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for t in self.named_tensors().values():
            t.zero_grad()

    def _output_matrix(self) -> Tensor:
        if self.out_proj is not None:
            return self.out_proj
        table = self.src_embed if self.tgt_embed is None else self.tgt_embed
        return transpose(table)

    def encode(
        self,
        srcs: Sequence[TokenSeq],
        mode: ExecutionMode = ExecutionMode.SEQUENTIAL,
    ) -> Tensor:
        """Packed encoder output after the final LN, shape [Σ t_src × d]."""
        ids, positions, lengths = _packed_ids(srcs)
        x = embed_and_position(ids, self.src_embed, positions)
        mask = block_mask(lengths)
        mp = self.cfg.multipath
        for layer in self.enc_layers:
            for kind, params in layer.sublayers():
                x = multipath_sublayer(
                    x,
                    kind,
                    params,
                    mp,
                    mode=mode,
                    mask=mask if kind is SublayerKind.ATTENTION else None,
                )
        return layer_norm(x, self.enc_final_ln)

    def decode(
        self,
        memory: Tensor,
        src_lengths: List[int],
        tgts: Sequence[TokenSeq],
    ) -> Tensor:
        ids, positions, lengths = _packed_ids(tgts)
        table = self.src_embed if self.tgt_embed is None else self.tgt_embed
        y = embed_and_position(ids, table, positions)
        self_mask = block_mask(lengths, causal=True)
        cross_mask = block_mask(lengths, src_lengths)
        for layer in self.dec_layers:
            y = add(
                y, mha(layer_norm(y, layer.self_ln), layer.self_attn, mask=self_mask)
            )
            y = add(
                y,
                mha(
                    layer_norm(y, layer.cross_ln),
                    layer.cross_attn,
                    memory=memory,
                    mask=cross_mask,
                ),
            )
            y = add(y, ffn(layer_norm(y, layer.ffn_ln), layer.ffn))
        return layer_norm(y, self.dec_final_ln)

    def forward_batch(
        self,
        srcs: Sequence[TokenSeq],
        tgts: Optional[Sequence[TokenSeq]] = None,
        mode: ExecutionMode = ExecutionMode.SEQUENTIAL,
    ) -> Tensor:
        """
        Packed logits for a batch.

        Encoder-only models return [Σ t_src × V]; seq2seq models return
        decoder logits [Σ t_tgt × V] with causal self-attention.
        """
        for seq in srcs:
            check_token_ids(np.asarray(seq, dtype=np.int64), self.cfg.vocab_size)
        if self.cfg.encoder_only:
            memory = self.encode(srcs, mode)
            return matmul(memory, self._output_matrix())
        if tgts is None:
            raise ValueError("seq2seq model needs target tokens (tgt)")
        if len(tgts) != len(srcs):
            raise ValueError(f"{len(srcs)} sources but {len(tgts)} targets")
        if any(len(s) == 0 for s in srcs) or any(len(t) == 0 for t in tgts):
            raise ValueError("seq2seq sequences must be non-empty")
        for seq in tgts:
            check_token_ids(np.asarray(seq, dtype=np.int64), self.cfg.vocab_size)
        memory = self.encode(srcs, mode)
        hidden = self.decode(memory, [len(s) for s in srcs], tgts)
        return matmul(hidden, self._output_matrix())

    def __call__(self, *args, **kwargs) -> Tensor:
        return self.forward_batch(*args, **kwargs)


def forward(
    model: Model,
    src: TokenSeq,
    tgt: Optional[TokenSeq] = None,
    mode: ExecutionMode = ExecutionMode.SEQUENTIAL,
) -> Tensor:
    """Logits for one sequence: [t_src × V] encoder-only, [t_tgt × V] seq2seq."""
    return model.forward_batch([src], None if tgt is None else [tgt], mode=mode)


def build_model(cfg: ModelConfig) -> Model:
    """
    Deterministic construction from ``cfg.seed``.

    Matrices are drawn Xavier-uniform in a fixed creation order, biases are
    zero, LayerNorm gains one, and alpha/beta follow the multipath init rule.
    """
    rng = np.random.default_rng(cfg.seed)
    d, heads, vocab = cfg.d_model, cfg.heads, cfg.vocab_size
    src_embed = xavier_uniform(rng, vocab, d)
    tgt_embed = None
    if not cfg.share_embeddings and not cfg.encoder_only:
        tgt_embed = xavier_uniform(rng, vocab, d)
    enc_layers = [
        EncoderLayer(
            attn=init_multipath_params(
                SublayerKind.ATTENTION, d, heads, cfg.multipath, rng
            ),
            ffn=init_multipath_params(
                SublayerKind.FEED_FORWARD, d, heads, cfg.multipath, rng
            ),
        )
        for _ in range(cfg.enc_depth)
    ]
    enc_final_ln = init_layer_norm(d)
    dec_layers = [
        DecoderLayer(
            self_ln=init_layer_norm(d),
            self_attn=init_attention(d, heads, rng),
            cross_ln=init_layer_norm(d),
            cross_attn=init_attention(d, heads, rng),
            ffn_ln=init_layer_norm(d),
            ffn=init_ffn(d, rng),
        )
        for _ in range(cfg.dec_depth)
    ]
    dec_final_ln = init_layer_norm(d) if not cfg.encoder_only else None
    out_proj = None if cfg.share_embeddings else xavier_uniform(rng, d, vocab)
    model = Model(
        cfg,
        src_embed=src_embed,
        enc_layers=enc_layers,
        enc_final_ln=enc_final_ln,
        tgt_embed=tgt_embed,
        dec_layers=dec_layers,
        dec_final_ln=dec_final_ln,
        out_proj=out_proj,
    )
    logger.debug(
        f"Built model enc_depth={cfg.enc_depth} n_paths={cfg.n_paths} "
        f"dec_depth={cfg.dec_depth} d={d}: "
        f"{sum(t.size for t in model.parameters())} trainable values"
    )
    return model
