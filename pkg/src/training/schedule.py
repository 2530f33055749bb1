# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import enum
import math
from typing import Dict

from pydantic import BaseModel, ConfigDict, Field

from src.errors import ConfigError


class ScheduleForm(str, enum.Enum):
    PEAK = "peak"
    CLASSICAL = "classical"


class ScheduleConfig(BaseModel):
    """Inverse square-root schedule with linear warmup."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    peak_lr: float = Field(0.001, gt=0, description="Learning rate at step=warmup")
    warmup_steps: int = Field(8000, ge=1, description="Linear warmup length")
    d_model: int = Field(
        512, ge=1, description="Only used by the classical d^-0.5 variant"
    )
    form: ScheduleForm = Field(
        ScheduleForm.PEAK, description="peak (peak_lr based) or classical (d^-0.5)"
    )


SCHEDULE_PRESETS: Dict[str, ScheduleConfig] = {
    "base": ScheduleConfig(peak_lr=0.001, warmup_steps=8000),
    "deep": ScheduleConfig(peak_lr=0.002, warmup_steps=16000),
}


def schedule_preset(name: str, d_model: int = 512) -> ScheduleConfig:
    if name not in SCHEDULE_PRESETS:
        raise ConfigError(
            f"unknown schedule preset '{name}'",
            [f"choose one of: {', '.join(SCHEDULE_PRESETS)}"],
        )
    return SCHEDULE_PRESETS[name].model_copy(update={"d_model": d_model})


def lr_at(step: int, s: ScheduleConfig) -> float:
    """peak_lr · min(step/warmup, √(warmup/step))."""
    if step < 1:
        raise ValueError(f"schedule is defined for step >= 1, got {step}")
    warmup = s.warmup_steps
    if step <= warmup:
        return s.peak_lr * (step / warmup)
    return s.peak_lr * math.sqrt(warmup / step)


def classical_lr_at(step: int, s: ScheduleConfig) -> float:
    """d^-0.5 · min(step^-0.5, step · warmup^-1.5)."""
    if step < 1:
        raise ValueError(f"schedule is defined for step >= 1, got {step}")
    return s.d_model**-0.5 * min(step**-0.5, step * s.warmup_steps**-1.5)


def learning_rate(step: int, s: ScheduleConfig) -> float:
    """Learning rate of ``step`` under the form ``s`` selects."""
    if s.form is ScheduleForm.CLASSICAL:
        return classical_lr_at(step, s)
    return lr_at(step, s)
