"""Embedding backends: the abstract interface plus concrete adapters."""

from __future__ import annotations

from ..errors import ConfigError
from .base import BackendDescriptor, EmbeddingBackend
from .mock import MockBackend, keyed_unit_vector

__all__ = [
    "BackendDescriptor",
    "EmbeddingBackend",
    "MockBackend",
    "keyed_unit_vector",
    "create_backend",
]


def create_backend(config) -> EmbeddingBackend:
    """Instantiate the backend named by a PipelineConfig."""
    name = config.backend
    if name == "mock":
        return MockBackend(
            embedding_dim=config.mock_embedding_dim,
            image_resolution=config.mock_image_resolution,
        )
    if name == "clip":
        from .clip import DEFAULT_MODEL_ID, ClipBackend

        return ClipBackend(model_id=config.model_id or DEFAULT_MODEL_ID, device=config.device)
    raise ConfigError(f"unknown backend {name!r}; expected 'mock' or 'clip'")
