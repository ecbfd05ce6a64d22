"""Translator interface for the multilingual prompt experiment."""

from __future__ import annotations

import abc
import logging

from .errors import ConfigError

logger = logging.getLogger(__name__)


class Translator(abc.ABC):
    @abc.abstractmethod
    def translate(self, text: str, language: str) -> str:
        """Translate ``text`` into the target ``language`` code."""


class IdentityTranslator(Translator):
    """Returns the input unchanged; useful for smoke tests and plumbing."""

    def translate(self, text: str, language: str) -> str:
        return text


class MarianTranslator(Translator):
    """MarianMT adapter (Helsinki-NLP opus-mt checkpoints), one per language.

    Requires the optional ``clip`` extra (torch + transformers) plus the
    per-language checkpoints.
    """

    def __init__(self, model_template: str = "Helsinki-NLP/opus-mt-en-{lang}",
                 device: str = "cpu"):
        try:
            from transformers import pipeline  # noqa: F401
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise ConfigError(
                "the marian translator needs transformers; install the [clip] extra"
            ) from exc
        self._model_template = model_template
        self._device = device
        self._pipelines: dict[str, object] = {}

    def _pipeline(self, language: str):
        if language not in self._pipelines:
            from transformers import pipeline

            model_id = self._model_template.format(lang=language)
            self._pipelines[language] = pipeline(
                "translation", model=model_id, device=self._device
            )
        return self._pipelines[language]

    def translate(self, text: str, language: str) -> str:
        result = self._pipeline(language)(text)
        return result[0]["translation_text"]


def create_translator(name: str, device: str = "cpu") -> Translator:
    if name == "identity":
        return IdentityTranslator()
    if name == "marian":
        return MarianTranslator(device=device)
    raise ConfigError(f"unknown translator {name!r}; expected 'marian' or 'identity'")
