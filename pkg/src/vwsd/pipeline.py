"""Per-sample pipeline: enriched text embedding, per-candidate image
embedding, and the final ranking. Shared by the estimator, the evaluation
harness, and the CLI so all entry points score identically."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

from PIL import Image, UnidentifiedImageError

from . import prompts as prompt_mod
from .augment import AugmentationProfile, generate_views, aggregate_image_embedding
from .backends import EmbeddingBackend, create_backend
from .config import PipelineConfig
from .dataset import Sample
from .embedding import Embedding
from .errors import BackendError, CandidateImageError
from .lexical import (
    LexicalResource,
    StaticLexicon,
    WordNetLexicon,
    blend_definition,
    candidate_definitions,
    lookup_synonym,
    select_definition,
)
from .prompts import FusionWeights, build_prompt_bundle, channel_embedding, fuse_channels, \
    load_template_file, multilingual_channel_embedding, strip_target
from .ranking import RankingResult, rank_candidates
from .translate import Translator, create_translator

logger = logging.getLogger(__name__)


@dataclass
class StageTimings:
    """Wall-clock stage durations for one sample, in milliseconds."""

    text_ms: float = 0.0
    image_ms: list[float] = field(default_factory=list)
    total_ms: float = 0.0


@dataclass
class PipelineRuntime:
    """A config resolved into live collaborators, reusable across samples."""

    config: PipelineConfig
    backend: EmbeddingBackend
    lexicon: LexicalResource | None
    translator: Translator | None
    semantic_templates: tuple[str, ...]
    photo_templates: tuple[str, ...]
    synonym_templates: tuple[str, ...]
    profile: AugmentationProfile


def _resolve_lexicon(config: PipelineConfig) -> LexicalResource | None:
    if config.lexicon == "none":
        return None
    if config.lexicon == "wordnet":
        return WordNetLexicon()
    return StaticLexicon.from_file(config.lexicon)


def build_runtime(
    config: PipelineConfig,
    backend: EmbeddingBackend | None = None,
    lexicon: LexicalResource | None = None,
    translator: Translator | None = None,
) -> PipelineRuntime:
    """Instantiate backend, lexicon, translator, and templates for a config.

    Pre-built collaborators can be injected, which is how tests swap in
    fixture resources.
    """
    backend = backend or create_backend(config)
    lexicon = lexicon if lexicon is not None else _resolve_lexicon(config)
    if translator is None and config.translation_enabled:
        translator = create_translator(config.translator, device=config.device)
    semantic = (
        load_template_file(config.semantic_templates_file)
        if config.semantic_templates_file
        else prompt_mod.SEMANTIC_TEMPLATES
    )
    photo = (
        load_template_file(config.photo_templates_file)
        if config.photo_templates_file
        else prompt_mod.PHOTO_TEMPLATES
    )
    synonym = (
        load_template_file(config.synonym_templates_file)
        if config.synonym_templates_file
        else prompt_mod.SYNONYM_PHOTO_TEMPLATES
    )
    profile = config.augmentation_profile(view_size=backend.descriptor.image_resolution)
    return PipelineRuntime(
        config=config,
        backend=backend,
        lexicon=lexicon,
        translator=translator,
        semantic_templates=tuple(semantic),
        photo_templates=tuple(photo),
        synonym_templates=tuple(synonym),
        profile=profile,
    )


def contextual_text_embedding(sample: Sample, backend: EmbeddingBackend,
                              pooling: str) -> Embedding:
    """Plain (prompt-free) text embedding of the context phrase.

    "target" pooling averages the target word's hidden states when the
    backend supports it, falling back to whole-text encoding otherwise.
    """
    if pooling == "target" and backend.supports_target_pooling:
        span = backend.find_target_span(sample.context_phrase, sample.target_word)
        if span is not None:
            return backend.encode_text_target(sample.context_phrase, span)
        logger.warning(
            "target %r not found in %r; falling back to whole-text encoding",
            sample.target_word, sample.context_phrase,
        )
    elif pooling == "target":
        logger.warning(
            "backend %r lacks hidden-state access; falling back to whole-text encoding",
            backend.descriptor.name,
        )
    return backend.encode_text(sample.context_phrase)


def _synonym_pair(sample: Sample, runtime: PipelineRuntime) -> tuple[str, str] | None:
    if runtime.lexicon is None or not runtime.config.synonym_prompts:
        return None
    context = strip_target(sample.target_word, sample.context_phrase)
    target_syn = lookup_synonym(runtime.lexicon, sample.target_word)
    context_syn = lookup_synonym(runtime.lexicon, context)
    if target_syn and context_syn:
        return (target_syn, context_syn)
    return None


def _embed_channel(prompt_list, runtime: PipelineRuntime) -> Embedding:
    config = runtime.config
    if config.translation_enabled and runtime.translator is not None and config.languages:
        return multilingual_channel_embedding(
            prompt_list, config.languages, runtime.translator, runtime.backend
        )
    return channel_embedding(prompt_list, runtime.backend)


def text_embedding_for_sample(sample: Sample, runtime: PipelineRuntime) -> Embedding:
    """The (optionally enriched) text-side embedding for one sample."""
    config = runtime.config
    if config.prompts_enabled:
        bundle = build_prompt_bundle(
            sample.target_word,
            sample.context_phrase,
            synonyms=_synonym_pair(sample, runtime),
            semantic_templates=runtime.semantic_templates,
            photo_templates=runtime.photo_templates,
            synonym_templates=runtime.synonym_templates,
        )
        h_photo = h_semantic = None
        if config.photo_channel:
            h_photo = _embed_channel(
                list(bundle.photo_prompts) + list(bundle.synonym_photo_prompts), runtime
            )
        if config.semantic_channel:
            h_semantic = _embed_channel(list(bundle.semantic_prompts), runtime)
        if h_photo is not None and h_semantic is not None:
            text_emb = fuse_channels(
                h_photo, h_semantic, FusionWeights(config.beta_p, config.beta_s)
            )
        else:
            text_emb = h_photo if h_photo is not None else h_semantic
    else:
        text_emb = contextual_text_embedding(sample, runtime.backend, config.vanilla_pooling)

    if config.definitions_enabled and runtime.lexicon is not None:
        definitions = candidate_definitions(
            runtime.lexicon,
            sample.target_word,
            include_synonyms=config.include_synonym_definitions,
            synonym_count=config.synonym_count,
        )
        if definitions:
            _, h_definition = select_definition(text_emb, definitions, runtime.backend)
            text_emb = blend_definition(h_definition, text_emb, config.alpha)
        else:
            logger.info("no definitions for %r; keeping the contextual embedding", sample.target_word)
    return text_emb


def load_candidate_image(path: Path, image_ref: str) -> Image.Image:
    try:
        with Image.open(path) as img:
            return img.convert("RGB")
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        raise CandidateImageError(image_ref, str(exc)) from exc


def embed_candidate_image(image: Image.Image, runtime: PipelineRuntime,
                          image_ref: str | None = None) -> Embedding:
    """Views -> per-view embeddings -> temperature-scaled normalized mean."""
    views = generate_views(image, runtime.profile, image_ref=image_ref)
    try:
        return aggregate_image_embedding(views, runtime.backend, tau=runtime.config.tau)
    except BackendError as exc:
        raise CandidateImageError(image_ref or "<unnamed>", str(exc)) from exc


def rank_sample(
    sample: Sample,
    runtime: PipelineRuntime,
    image_root: Path,
    timings: StageTimings | None = None,
) -> RankingResult:
    """Run the full per-sample pipeline and rank the 10 candidates."""
    start = perf_counter()
    text_emb = text_embedding_for_sample(sample, runtime)
    text_done = perf_counter()
    image_embs = []
    image_ms = []
    for ref in sample.candidates:
        image_start = perf_counter()
        image = load_candidate_image(Path(image_root) / ref, ref)
        image_embs.append(embed_candidate_image(image, runtime, image_ref=ref))
        image_ms.append((perf_counter() - image_start) * 1000.0)
    result = rank_candidates(text_emb, image_embs, sample.gold_index)
    if timings is not None:
        timings.text_ms = (text_done - start) * 1000.0
        timings.image_ms = image_ms
        timings.total_ms = (perf_counter() - start) * 1000.0
    return result
