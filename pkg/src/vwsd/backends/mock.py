"""Deterministic weight-free backend for tests and CI.

Every embedding is a keyed pseudo-random unit vector: the canonical input
bytes are hashed with blake2b to a 64-bit seed, which drives a PCG64
generator that draws a standard-normal vector, normalized to unit length.
Identical inputs therefore map to identical vectors across processes and
machines; no global state or ambient randomness is involved.
"""

from __future__ import annotations

import hashlib
import logging

import numpy as np
from PIL import Image

from ..embedding import Embedding, l2_normalize
from .base import BackendDescriptor, EmbeddingBackend

logger = logging.getLogger(__name__)


def keyed_unit_vector(key: bytes, dim: int) -> np.ndarray:
    """The mock backend's core primitive: bytes -> deterministic unit vector."""
    seed = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")
    rng = np.random.Generator(np.random.PCG64(seed))
    return l2_normalize(rng.standard_normal(dim))


class MockBackend(EmbeddingBackend):
    """Hash-seeded stand-in encoder with the same contracts as a real one."""

    supports_target_pooling = True

    def __init__(self, embedding_dim: int = 512, image_resolution: int = 224,
                 text_context_limit: int = 77):
        self._descriptor = BackendDescriptor(
            name="mock",
            embedding_dim=embedding_dim,
            text_context_limit=text_context_limit,
            image_resolution=image_resolution,
        )

    @property
    def descriptor(self) -> BackendDescriptor:
        return self._descriptor

    # Tokens are whitespace-delimited; truncation reassembles the kept
    # tokens so the canonical form (and hence the vector) reflects it.
    def _canonical_text(self, text: str) -> str:
        if not text:
            raise ValueError("cannot encode empty text")
        tokens = text.split()
        if not tokens:
            raise ValueError("cannot encode whitespace-only text")
        limit = self._descriptor.text_context_limit
        if len(tokens) > limit:
            logger.warning(
                "text of %d tokens exceeds context limit %d; truncating", len(tokens), limit
            )
            return " ".join(tokens[:limit])
        return text

    def encode_text(self, text: str) -> Embedding:
        canonical = self._canonical_text(text)
        vec = keyed_unit_vector(b"text\x00" + canonical.encode("utf-8"),
                                self._descriptor.embedding_dim)
        return Embedding(vec, normalized=True)

    def text_hidden_states(self, text: str) -> np.ndarray:
        canonical = self._canonical_text(text)
        tokens = canonical.split()
        # each "hidden state" is keyed by the whole text plus the token
        # position, mimicking context-dependent states
        rows = [
            keyed_unit_vector(
                f"hidden\x00{canonical}\x00{i}".encode("utf-8"),
                self._descriptor.embedding_dim,
            )
            for i in range(len(tokens))
        ]
        return np.stack(rows)

    def find_target_span(self, text: str, target: str) -> tuple[int, int] | None:
        tokens = [t.lower() for t in text.split()]
        needle = target.lower().split()
        if not needle:
            return None
        for start in range(len(tokens) - len(needle) + 1):
            if tokens[start:start + len(needle)] == needle:
                return (start, start + len(needle))
        return None

    def _preprocess(self, image: Image.Image) -> Image.Image:
        if image.mode != "RGB":
            image = image.convert("RGB")
        res = self._descriptor.image_resolution
        if image.size != (res, res):
            image = image.resize((res, res), Image.Resampling.BICUBIC)
        return image

    def encode_image(self, image: Image.Image) -> Embedding:
        prepared = self._preprocess(image)
        vec = keyed_unit_vector(b"image\x00" + prepared.tobytes(),
                                self._descriptor.embedding_dim)
        return Embedding(vec, normalized=True)
