"""The embedding value type that every pipeline stage exchanges.

All embeddings leaving a backend or a pooling step are unit vectors; the
``normalized`` flag records that the L2 norm is 1 (within ``UNIT_NORM_ATOL``)
so downstream cosine math can skip re-normalizing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateFusionError

UNIT_NORM_ATOL = 1e-6

_ZERO_NORM_EPS = 1e-12


def l2_normalize(values: np.ndarray) -> np.ndarray:
    """Scale ``values`` to unit L2 norm.

    Raises DegenerateFusionError when the vector is (numerically) zero,
    which is how every weighted-sum stage reports a degenerate result.
    """
    values = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(values))
    if norm < _ZERO_NORM_EPS:
        raise DegenerateFusionError("cannot normalize a zero-norm vector")
    return values / norm


@dataclass(frozen=True)
class Embedding:
    """A fixed-dimension real vector with an L2-normalization flag."""

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("embedding values must be a nonempty 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding values must be finite")
        if self.normalized and abs(float(np.linalg.norm(arr)) - 1.0) > UNIT_NORM_ATOL:
            raise ValueError("normalized flag set but L2 norm is not 1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def unit(self) -> "Embedding":
        """Return a unit-norm version of this embedding."""
        if self.normalized:
            return self
        return Embedding(l2_normalize(self.values), normalized=True)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)


def normalized_mean(embeddings: Sequence[Embedding] | Iterable[Embedding],
                    scale: float = 1.0) -> Embedding:
    """Arithmetic mean of embeddings, optionally scaled, then L2-normalized.

    The scale factor is mathematically inert (positive scaling before
    normalization cancels); it is kept so callers can pass a temperature
    through unchanged.
    """
    embeddings = list(embeddings)
    if not embeddings:
        raise ValueError("cannot pool an empty list of embeddings")
    stacked = np.stack([e.values for e in embeddings])
    pooled = stacked.mean(axis=0) * scale
    return Embedding(l2_normalize(pooled), normalized=True)
