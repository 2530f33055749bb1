# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

"""
Exception hierarchy shared by every package.

Each error also derives from the closest builtin so callers that only know
about ``ValueError`` / ``RuntimeError`` keep working.
"""

from typing import Any, Dict, List, Optional


class MultipathError(Exception):
    """Base class for all errors raised by this project."""


class ShapeError(MultipathError, ValueError):
    """Tensor extents do not conform."""


class TapeError(MultipathError, RuntimeError):
    """Autodiff contract violated (non-scalar loss, consumed tape, ...)."""


class ConfigError(MultipathError, ValueError):
    """Invalid configuration, with optional per-field / per-line diagnostics."""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        self.diagnostics = diagnostics or []
        if self.diagnostics:
            message = message + "\n" + "\n".join(f"  - {d}" for d in self.diagnostics)
        super().__init__(message)


class UnsupportedConfigError(MultipathError, ValueError):
    """The operation is not defined for this configuration."""


class ModelTooLargeError(MultipathError, ValueError):
    """Refuse finite-difference checks that would run for hours."""


class VocabMismatchError(MultipathError, ValueError):
    """Task and model disagree on the vocabulary size."""


class MissingGradientError(MultipathError, RuntimeError):
    """A parameter was handed to the optimizer without a populated grad."""


class CheckpointError(MultipathError, ValueError):
    """Checkpoint file is malformed or does not match the model."""


class BenchResourceError(MultipathError, MemoryError):
    """A benchmark configuration exceeds the memory guard."""

    def __init__(self, message: str, config: Dict[str, Any]):
        self.config = config
        super().__init__(f"{message}: {config}")


class TokenRangeError(MultipathError, ValueError):
    """A token id lies outside the vocabulary."""
