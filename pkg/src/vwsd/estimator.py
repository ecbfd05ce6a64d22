"""Scikit-learn-style estimator wrapping the disambiguation pipeline.

The pipeline is zero-shot, so ``fit`` performs no learning: it validates the
hyperparameters and loads the backend and lexical resources. ``predict``
returns the index of the top-ranked candidate image per sample; the full
score matrix is available through ``decision_function`` and complete
rankings through ``rank``. ``get_params``/``set_params`` follow scikit-learn
conventions, so the estimator composes with ``clone`` and parameter search
utilities.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .config import PipelineConfig
from .dataset import Sample, SampleSet
from .evaluation import compute_mrr
from .lexical import LexicalResource
from .pipeline import build_runtime, rank_sample
from .ranking import RankingResult
from .translate import Translator


class VwsdRanker(BaseEstimator):
    """Rank 10 candidate images against an ambiguous word in context.

    Parameters mirror the documented pipeline configuration keys 1:1 (see
    :mod:`vwsd.config`), plus ``image_root`` for resolving candidate image
    paths when ``X`` is a bare list of samples. The ``lexicon`` and
    ``translator`` parameters additionally accept pre-built resource
    instances.

    Examples
    --------
    >>> from vwsd import VwsdRanker
    >>> ranker = VwsdRanker(backend="mock").fit()
    >>> predictions = ranker.predict(sample_set)   # doctest: +SKIP
    """

    def __init__(
        self,
        backend="mock",
        model_id=None,
        device="cpu",
        mock_embedding_dim=512,
        mock_image_resolution=224,
        prompts_enabled=True,
        semantic_channel=True,
        photo_channel=True,
        beta_p=0.5,
        beta_s=0.5,
        semantic_templates_file=None,
        photo_templates_file=None,
        synonym_templates_file=None,
        synonym_prompts=True,
        vanilla_pooling="target",
        lexicon="none",
        definitions_enabled=False,
        alpha=0.15,
        include_synonym_definitions=False,
        synonym_count=2,
        augmentations_enabled=False,
        views_tta=5,
        views_geometric=3,
        views_photometric=3,
        views_multicrop=4,
        views_grid=9,
        views_midquadrant=4,
        rotation_min_degrees=-7.0,
        rotation_max_degrees=7.0,
        brightness_jitter=0.2,
        color_jitter=0.2,
        blur_radius=1.0,
        zoom_scale=0.75,
        center_crop_scale=0.875,
        slight_crop_min=0.90,
        slight_crop_max=1.0,
        tau=1.0,
        translation_enabled=False,
        translator="marian",
        languages=(),
        seed=0,
        workers=1,
        collect_timings=True,
        image_root=".",
    ):
        self.backend = backend
        self.model_id = model_id
        self.device = device
        self.mock_embedding_dim = mock_embedding_dim
        self.mock_image_resolution = mock_image_resolution
        self.prompts_enabled = prompts_enabled
        self.semantic_channel = semantic_channel
        self.photo_channel = photo_channel
        self.beta_p = beta_p
        self.beta_s = beta_s
        self.semantic_templates_file = semantic_templates_file
        self.photo_templates_file = photo_templates_file
        self.synonym_templates_file = synonym_templates_file
        self.synonym_prompts = synonym_prompts
        self.vanilla_pooling = vanilla_pooling
        self.lexicon = lexicon
        self.definitions_enabled = definitions_enabled
        self.alpha = alpha
        self.include_synonym_definitions = include_synonym_definitions
        self.synonym_count = synonym_count
        self.augmentations_enabled = augmentations_enabled
        self.views_tta = views_tta
        self.views_geometric = views_geometric
        self.views_photometric = views_photometric
        self.views_multicrop = views_multicrop
        self.views_grid = views_grid
        self.views_midquadrant = views_midquadrant
        self.rotation_min_degrees = rotation_min_degrees
        self.rotation_max_degrees = rotation_max_degrees
        self.brightness_jitter = brightness_jitter
        self.color_jitter = color_jitter
        self.blur_radius = blur_radius
        self.zoom_scale = zoom_scale
        self.center_crop_scale = center_crop_scale
        self.slight_crop_min = slight_crop_min
        self.slight_crop_max = slight_crop_max
        self.tau = tau
        self.translation_enabled = translation_enabled
        self.translator = translator
        self.languages = languages
        self.seed = seed
        self.workers = workers
        self.collect_timings = collect_timings
        self.image_root = image_root

    # -- scikit-learn protocol ------------------------------------------------

    def fit(self, X=None, y=None):
        """Validate parameters and load the backend and resources.

        Zero-shot: ``X``/``y`` are accepted for interface compatibility and
        ignored. Returns self.
        """
        params = self.get_params(deep=False)
        params.pop("image_root")
        lexicon_param = params.get("lexicon")
        translator_param = params.get("translator")
        injected_lexicon = None
        injected_translator = None
        if isinstance(lexicon_param, LexicalResource):
            injected_lexicon = lexicon_param
            params["lexicon"] = "none"
        if isinstance(translator_param, Translator):
            injected_translator = translator_param
            params["translator"] = "identity"
        self.config_ = PipelineConfig(**params)
        self.runtime_ = build_runtime(
            self.config_, lexicon=injected_lexicon, translator=injected_translator
        )
        return self

    def predict(self, X) -> np.ndarray:
        """Index of the top-ranked candidate for each sample."""
        return np.array([r.predicted_index for r in self.rank(X)], dtype=int)

    def decision_function(self, X) -> np.ndarray:
        """Cosine scores, shape (n_samples, 10)."""
        return np.array([r.scores for r in self.rank(X)], dtype=float)

    def rank(self, X) -> list[RankingResult]:
        """Full ranking results for each sample."""
        check_is_fitted(self, "runtime_")
        samples, image_root = self._as_samples(X)
        return [rank_sample(s, self.runtime_, image_root) for s in samples]

    def score(self, X, y=None) -> float:
        """Mean reciprocal rank of the gold candidates.

        ``y`` overrides the samples' own gold indices when given.
        """
        check_is_fitted(self, "runtime_")
        samples, image_root = self._as_samples(X)
        if y is not None:
            y = list(y)
            if len(y) != len(samples):
                raise ValueError("y must supply one gold index per sample")
        ranks = []
        for i, sample in enumerate(samples):
            gold = y[i] if y is not None else sample.gold_index
            if gold is None:
                raise ValueError(f"sample {sample.id!r} has no gold index and no y was given")
            result = rank_sample(sample, self.runtime_, image_root)
            rescored = rank_candidates_with_gold(result, int(gold))
            ranks.append(rescored)
        return compute_mrr(ranks)

    # -- helpers ---------------------------------------------------------------

    def _as_samples(self, X) -> tuple[list[Sample], Path]:
        if isinstance(X, SampleSet):
            return list(X.samples), X.image_root
        if isinstance(X, Sample):
            return [X], Path(self.image_root)
        if isinstance(X, Iterable):
            samples = list(X)
            if not all(isinstance(s, Sample) for s in samples):
                raise TypeError("X must be a SampleSet or an iterable of Sample objects")
            return samples, Path(self.image_root)
        raise TypeError(f"cannot interpret {type(X).__name__} as samples")


def rank_candidates_with_gold(result: RankingResult, gold_index: int) -> int:
    """1-based rank of ``gold_index`` inside an existing ranking."""
    return result.order.index(gold_index) + 1


#: Estimator parameters that are not pipeline configuration keys.
ESTIMATOR_ONLY_PARAMS = frozenset({"image_root"})
