"""CLIP-family adapter backed by Hugging Face ``transformers``.

Requires the optional ``clip`` extra (torch + transformers) and downloadable
or locally cached checkpoint weights. Each checkpoint's own published
preprocessing (tokenizer, image mean/std, resize) is authoritative, so all
of it is taken from the checkpoint's processor rather than hard-coded.
"""

from __future__ import annotations

import logging
from functools import cached_property
from typing import Sequence

import numpy as np
from PIL import Image

from ..embedding import Embedding, l2_normalize
from ..errors import BackendError
from .base import BackendDescriptor, EmbeddingBackend

logger = logging.getLogger(__name__)

DEFAULT_MODEL_ID = "openai/clip-vit-base-patch32"

_TEXT_BATCH = 64
_IMAGE_BATCH = 32


class ClipBackend(EmbeddingBackend):
    """Zero-shot CLIP text/image encoder projecting into the joint space."""

    supports_target_pooling = True

    def __init__(self, model_id: str = DEFAULT_MODEL_ID, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoProcessor, AutoTokenizer, CLIPModel
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise BackendError(
                "the clip backend needs torch and transformers; "
                "install the package with the [clip] extra"
            ) from exc
        try:
            self._model = CLIPModel.from_pretrained(model_id).eval().to(device)
            self._processor = AutoProcessor.from_pretrained(model_id)
            self._tokenizer = AutoTokenizer.from_pretrained(model_id, use_fast=True)
        except Exception as exc:
            raise BackendError(f"cannot load CLIP checkpoint {model_id!r}: {exc}") from exc
        self._torch = torch
        self._device = device
        self._model_id = model_id

    @cached_property
    def descriptor(self) -> BackendDescriptor:
        image_processor = getattr(self._processor, "image_processor", self._processor)
        crop = getattr(image_processor, "crop_size", None) or getattr(image_processor, "size", {})
        resolution = crop.get("height") if isinstance(crop, dict) else int(crop or 224)
        context = int(getattr(self._tokenizer, "model_max_length", 77))
        return BackendDescriptor(
            name=f"clip:{self._model_id}",
            embedding_dim=int(self._model.config.projection_dim),
            text_context_limit=context if 0 < context < 10_000 else 77,
            image_resolution=int(resolution or 224),
        )

    def _tokenize(self, texts: Sequence[str], offsets: bool = False):
        limit = self.descriptor.text_context_limit
        plain = self._tokenizer(list(texts), padding=True)
        if any(len(ids) > limit for ids in plain["input_ids"]):
            logger.warning("text exceeds the %d-token context limit; truncating", limit)
        return self._tokenizer(
            list(texts),
            padding=True,
            truncation=True,
            max_length=limit,
            return_tensors="pt",
            return_offsets_mapping=offsets,
        )

    def encode_text(self, text: str) -> Embedding:
        return self.encode_text_batch([text])[0]

    def encode_text_batch(self, texts: Sequence[str]) -> list[Embedding]:
        if not texts:
            return []
        for i, text in enumerate(texts):
            if not text or not text.strip():
                raise BackendError(f"encode_text_batch item {i}: cannot encode empty text")
        out: list[Embedding] = []
        torch = self._torch
        with torch.no_grad():
            for start in range(0, len(texts), _TEXT_BATCH):
                chunk = list(texts[start:start + _TEXT_BATCH])
                tokens = self._tokenize(chunk)
                tokens.pop("offset_mapping", None)
                tokens = {k: v.to(self._device) for k, v in tokens.items()}
                feats = self._model.get_text_features(**tokens).cpu().numpy()
                out.extend(Embedding(l2_normalize(row), normalized=True) for row in feats)
        return out

    def text_hidden_states(self, text: str) -> np.ndarray:
        """Last-layer token states projected into the joint space."""
        if not text or not text.strip():
            raise ValueError("cannot encode empty text")
        torch = self._torch
        with torch.no_grad():
            tokens = self._tokenize([text])
            tokens.pop("offset_mapping", None)
            tokens = {k: v.to(self._device) for k, v in tokens.items()}
            hidden = self._model.text_model(
                input_ids=tokens["input_ids"],
                attention_mask=tokens.get("attention_mask"),
            ).last_hidden_state
            projected = self._model.text_projection(hidden)[0]
        return projected.cpu().numpy()

    def find_target_span(self, text: str, target: str) -> tuple[int, int] | None:
        lowered, needle = text.lower(), target.lower()
        at = lowered.find(needle)
        if at < 0:
            return None
        encoding = self._tokenize([text], offsets=True)
        offsets = encoding["offset_mapping"][0].tolist()
        covered = [
            i for i, (a, b) in enumerate(offsets)
            if b > a and a < at + len(needle) and b > at
        ]
        if not covered:
            return None
        return (min(covered), max(covered) + 1)

    def encode_image(self, image: Image.Image) -> Embedding:
        return self.encode_image_batch([image])[0]

    def encode_image_batch(self, images: Sequence[Image.Image]) -> list[Embedding]:
        if not images:
            return []
        out: list[Embedding] = []
        torch = self._torch
        with torch.no_grad():
            for start in range(0, len(images), _IMAGE_BATCH):
                chunk = [img.convert("RGB") for img in images[start:start + _IMAGE_BATCH]]
                try:
                    pixels = self._processor(images=chunk, return_tensors="pt")
                except Exception as exc:
                    raise BackendError(f"image preprocessing failed: {exc}") from exc
                pixels = {k: v.to(self._device) for k, v in pixels.items()}
                feats = self._model.get_image_features(**pixels).cpu().numpy()
                out.extend(Embedding(l2_normalize(row), normalized=True) for row in feats)
        return out
