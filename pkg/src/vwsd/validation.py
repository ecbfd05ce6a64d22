"""Input validation helpers used by the public API surface."""

from __future__ import annotations

from typing import Sequence

from .embedding import UNIT_NORM_ATOL, Embedding


def check_embedding(value, name: str = "embedding", unit: bool = False) -> Embedding:
    """Validate that ``value`` is an Embedding, optionally unit-norm."""
    if not isinstance(value, Embedding):
        raise TypeError(f"{name} must be an Embedding, got {type(value).__name__}")
    if unit and not value.normalized:
        import numpy as np

        if abs(float(np.linalg.norm(value.values)) - 1.0) > UNIT_NORM_ATOL:
            raise ValueError(f"{name} must be unit-norm")
    return value


def check_same_dim(a: Embedding, b: Embedding, names: str = "embeddings") -> None:
    if a.dim != b.dim:
        raise ValueError(f"{names} must share a dimension, got {a.dim} and {b.dim}")


def check_fraction_open(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {value}")
    return value


def check_in_closed_range(value: float, low: float, high: float, name: str) -> float:
    value = float(value)
    if not low <= value <= high:
        raise ValueError(f"{name} must lie in [{low}, {high}], got {value}")
    return value


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_nonempty(seq: Sequence, name: str) -> Sequence:
    if len(seq) == 0:
        raise ValueError(f"{name} must not be empty")
    return seq
