"""Dual-channel prompt generation, pooling, and fusion.

A sample's target word is rephrased through two prompt channels: semantic
templates that pin the word to a narrow meaning, and photo templates that
phrase it as an image description. Each channel is encoded prompt-by-prompt,
mean-pooled, normalized, and the two channel vectors are fused by a weighted
sum. Synonym-based prompts, when available, extend the photo channel only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .embedding import Embedding, l2_normalize, normalized_mean
from .errors import ConfigError
from .validation import check_embedding, check_nonempty, check_same_dim

logger = logging.getLogger(__name__)

SEMANTIC_TEMPLATES: tuple[str, ...] = (
    "{t} related to {c}",
    "the concept of {t} in {c}",
    "{t} in the context of {c}",
)

PHOTO_TEMPLATES: tuple[str, ...] = (
    "a photo of {t} {c}",
    "{t} with {c}, natural scene",
    "{t} appearing in a {c} environment",
)

SYNONYM_PHOTO_TEMPLATES: tuple[str, ...] = (
    "a photo of {t_syn} {c_syn}",
)


@dataclass(frozen=True)
class FusionWeights:
    """Relative weights of the photo and semantic channels."""

    beta_p: float
    beta_s: float

    def __post_init__(self):
        if self.beta_p < 0 or self.beta_s < 0:
            raise ValueError("fusion weights must be nonnegative")
        if self.beta_p + self.beta_s <= 0:
            raise ValueError("at least one fusion weight must be positive")


@dataclass(frozen=True)
class PromptBundle:
    """All prompt strings generated for one sample, with template provenance.

    ``provenance`` runs parallel to semantic + photo + synonym-photo prompts
    concatenated in that order, naming the channel and template index each
    prompt came from.
    """

    semantic_prompts: tuple[str, ...]
    photo_prompts: tuple[str, ...]
    synonym_photo_prompts: tuple[str, ...]
    provenance: tuple[str, ...]

    def __post_init__(self):
        if not self.semantic_prompts or not self.photo_prompts:
            raise ValueError("a bundle needs at least one prompt per channel")
        total = (
            len(self.semantic_prompts)
            + len(self.photo_prompts)
            + len(self.synonym_photo_prompts)
        )
        if len(self.provenance) != total:
            raise ValueError("provenance must label every prompt")


def strip_target(target: str, phrase: str) -> str:
    """Context string for templates: the phrase with the target token removed.

    Removal is exact-token and case-insensitive. When nothing is left (or
    the target never appears as a token) the full phrase is returned so the
    templates always receive a nonempty context.
    """
    kept = [tok for tok in phrase.split() if tok.lower() != target.lower()]
    return " ".join(kept) if kept else phrase


def _instantiate(template: str, values: dict[str, str]) -> str:
    try:
        return template.format_map(values)
    except (KeyError, IndexError) as exc:
        raise ConfigError(f"template {template!r} references unknown placeholder {exc}") from exc


def build_semantic_prompts(
    target: str, context: str, templates: Sequence[str] = SEMANTIC_TEMPLATES
) -> list[str]:
    """Instantiate every semantic template, in fixed order."""
    if not target or not context:
        raise ValueError("target and context must be nonempty")
    return [_instantiate(t, {"t": target, "c": context}) for t in templates]


def build_photo_prompts(
    target: str,
    context: str,
    synonyms: tuple[str, str] | None = None,
    templates: Sequence[str] = PHOTO_TEMPLATES,
    synonym_templates: Sequence[str] = SYNONYM_PHOTO_TEMPLATES,
) -> list[str]:
    """Instantiate photo templates, plus synonym templates when a
    (target_synonym, context_synonym) pair is supplied."""
    if not target or not context:
        raise ValueError("target and context must be nonempty")
    prompts = [_instantiate(t, {"t": target, "c": context}) for t in templates]
    if synonyms is not None:
        t_syn, c_syn = synonyms
        prompts.extend(
            _instantiate(t, {"t": target, "c": context, "t_syn": t_syn, "c_syn": c_syn})
            for t in synonym_templates
        )
    return prompts


def build_prompt_bundle(
    target: str,
    context_phrase: str,
    synonyms: tuple[str, str] | None = None,
    semantic_templates: Sequence[str] = SEMANTIC_TEMPLATES,
    photo_templates: Sequence[str] = PHOTO_TEMPLATES,
    synonym_templates: Sequence[str] = SYNONYM_PHOTO_TEMPLATES,
) -> PromptBundle:
    """Generate the full prompt set for one sample. Pure and deterministic."""
    context = strip_target(target, context_phrase)
    semantic = tuple(build_semantic_prompts(target, context, semantic_templates))
    photo = tuple(build_photo_prompts(target, context, None, photo_templates))
    synonym_photo: tuple[str, ...] = ()
    if synonyms is not None:
        t_syn, c_syn = synonyms
        synonym_photo = tuple(
            _instantiate(t, {"t": target, "c": context, "t_syn": t_syn, "c_syn": c_syn})
            for t in synonym_templates
        )
    provenance = (
        tuple(f"semantic/{i}" for i in range(len(semantic)))
        + tuple(f"photo/{i}" for i in range(len(photo)))
        + tuple(f"synonym_photo/{i}" for i in range(len(synonym_photo)))
    )
    return PromptBundle(semantic, photo, synonym_photo, provenance)


def channel_embedding(prompts: Sequence[str], backend) -> Embedding:
    """Encode each prompt, average the unit vectors, L2-normalize the mean."""
    check_nonempty(prompts, "prompts")
    return normalized_mean(backend.encode_text_batch(list(prompts)))


def fuse_channels(h_p: Embedding, h_s: Embedding, weights: FusionWeights) -> Embedding:
    """Weighted sum of the photo and semantic channel embeddings, normalized.

    Invariant under positive common scaling of the weights. Antiparallel
    channels with matching weights raise DegenerateFusionError.
    """
    check_embedding(h_p, "photo channel embedding", unit=True)
    check_embedding(h_s, "semantic channel embedding", unit=True)
    check_same_dim(h_p, h_s)
    fused = weights.beta_p * h_p.values + weights.beta_s * h_s.values
    return Embedding(l2_normalize(fused), normalized=True)


def multilingual_channel_embedding(
    prompts: Sequence[str],
    languages: Sequence[str],
    translator,
    backend,
) -> Embedding:
    """Pool English prompts together with their translations.

    Every prompt is translated into each language; all embeddings (English
    plus translations) are averaged and normalized. A translator failure
    skips that whole language with a warning. Disabled by default in the
    pipeline: the extra languages tend to dilute the signal.
    """
    check_nonempty(prompts, "prompts")
    texts = list(prompts)
    for language in languages:
        try:
            texts.extend(translator.translate(p, language) for p in prompts)
        except Exception as exc:
            logger.warning("translation into %r failed (%s); skipping the language", language, exc)
    return normalized_mean(backend.encode_text_batch(texts))


def load_template_file(path: str | Path) -> tuple[str, ...]:
    """Read an ordered template list: UTF-8, one template per line.

    Placeholders: {t}, {c}, {t_syn}, {c_syn}. Blank lines are skipped.
    """
    lines = [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines()]
    templates = tuple(line for line in lines if line)
    if not templates:
        raise ConfigError(f"template file {path} contains no templates")
    return templates
