# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import io
import math
from dataclasses import dataclass, field
from typing import List

import pandas as pd

from src.errors import UnsupportedConfigError
from src.multipath import SublayerKind

from .model import Model

DIVERSITY_COLUMNS = ["layer", "kind", "alpha1", "alpha2", "d"]


def diversity_value(alpha1: float, alpha2: float) -> float:
    """|α₁−α₂| / |α₁+α₂|, infinite when nonequal weights cancel exactly."""
    diff = abs(alpha1 - alpha2)
    total = abs(alpha1 + alpha2)
    if total == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / total


@dataclass(frozen=True)
class DiversityRow:
    layer: int
    kind: SublayerKind
    alpha1: float
    alpha2: float
    d: float


@dataclass
class DiversityReport:
    rows: List[DiversityRow] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.layer, r.kind.value, r.alpha1, r.alpha2, r.d) for r in self.rows],
            columns=DIVERSITY_COLUMNS,
        )

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")

    @classmethod
    def from_csv(cls, text: str) -> "DiversityReport":
        frame = pd.read_csv(io.StringIO(text), float_precision="round_trip")
        return cls(
            rows=[
                DiversityRow(
                    layer=int(r.layer),
                    kind=SublayerKind(r.kind),
                    alpha1=float(r.alpha1),
                    alpha2=float(r.alpha2),
                    d=float(r.d),
                )
                for r in frame.itertuples(index=False)
            ]
        )


def alpha_diversity(model: Model) -> DiversityReport:
    """Per-sublayer |α₁−α₂|/|α₁+α₂| for a 2-path encoder."""
    n_paths = model.cfg.n_paths
    if n_paths != 2:
        raise UnsupportedConfigError(
            f"alpha diversity is defined for 2-path models only, got n_paths={n_paths}"
        )
    rows = []
    for layer_index, layer in enumerate(model.enc_layers):
        for kind, params in layer.sublayers():
            a1, a2 = (float(v) for v in params.alpha.data[:2])
            d = diversity_value(a1, a2)
            rows.append(DiversityRow(layer_index, kind, a1, a2, d))
    return DiversityReport(rows)
