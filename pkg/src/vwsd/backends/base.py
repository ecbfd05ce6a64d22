"""Abstract interface for text/image encoders sharing one embedding space."""

from __future__ import annotations

import abc
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from PIL import Image

from ..embedding import Embedding, l2_normalize
from ..errors import BackendError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BackendDescriptor:
    """Static facts about a backend: name, dimension, and input limits."""

    name: str
    embedding_dim: int
    text_context_limit: int
    image_resolution: int

    def __post_init__(self):
        if self.embedding_dim <= 0:
            raise ValueError("embedding_dim must be positive")
        if self.text_context_limit <= 0:
            raise ValueError("text_context_limit must be positive")
        if self.image_resolution <= 0:
            raise ValueError("image_resolution must be positive")


class EmbeddingBackend(abc.ABC):
    """Produces unit-norm text and image embeddings in a shared space.

    Instances are read-only after construction and safe for concurrent
    encode calls; adapters wrapping non-reentrant inference sessions must
    serialize internally.
    """

    #: Whether per-token hidden states (and hence target-span pooling) are
    #: available. Backends without it fall back to whole-text encoding.
    supports_target_pooling: bool = False

    @property
    @abc.abstractmethod
    def descriptor(self) -> BackendDescriptor:
        ...

    @abc.abstractmethod
    def encode_text(self, text: str) -> Embedding:
        """Embed whole text (end-of-sequence pooling for CLIP-style models).

        Text longer than the context limit is truncated with a logged
        warning; empty text is an error. The result is L2-normalized.
        """

    @abc.abstractmethod
    def encode_image(self, image: Image.Image) -> Embedding:
        """Embed one decoded raster image, resized and normalized per the
        descriptor. The result is L2-normalized."""

    def text_hidden_states(self, text: str) -> np.ndarray:
        """Per-token hidden states, shape (n_tokens, embedding_dim).

        Optional capability; the default raises BackendError.
        """
        raise BackendError(f"backend {self.descriptor.name!r} does not expose hidden states")

    def find_target_span(self, text: str, target: str) -> tuple[int, int] | None:
        """Token index range [start, stop) covering the first occurrence of
        ``target`` in ``text``, or None when absent / unsupported."""
        return None

    def encode_text_target(self, text: str, span: tuple[int, int]) -> Embedding:
        """Pool the target word's hidden states (mean), then L2-normalize."""
        start, stop = span
        states = self.text_hidden_states(text)
        if not 0 <= start < stop <= states.shape[0]:
            raise ValueError(f"token span {span} is empty or out of range for {states.shape[0]} tokens")
        pooled = states[start:stop].mean(axis=0)
        return Embedding(l2_normalize(pooled), normalized=True)

    def encode_text_batch(self, texts: Sequence[str]) -> list[Embedding]:
        """Element-wise encode_text, order preserved."""
        out = []
        for i, text in enumerate(texts):
            try:
                out.append(self.encode_text(text))
            except Exception as exc:
                raise BackendError(f"encode_text_batch item {i}: {exc}") from exc
        return out

    def encode_image_batch(self, images: Sequence[Image.Image]) -> list[Embedding]:
        """Element-wise encode_image, order preserved."""
        out = []
        for i, image in enumerate(images):
            try:
                out.append(self.encode_image(image))
            except Exception as exc:
                raise BackendError(f"encode_image_batch item {i}: {exc}") from exc
        return out
