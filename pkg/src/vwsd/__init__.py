"""Visual word sense disambiguation: rank candidate images against an
ambiguous word in context by cosine similarity in a shared text-image
embedding space, with prompt-ensemble text enrichment and multi-view image
aggregation."""

from .augment import AugmentationProfile, ViewSet, aggregate_image_embedding, generate_views
from .backends import BackendDescriptor, EmbeddingBackend, MockBackend, create_backend
from .config import PipelineConfig, apply_overrides, load_config
from .dataset import (
    CANDIDATES_PER_SAMPLE,
    Sample,
    SampleSet,
    load_dataset,
    save_dataset,
    split_train_validation,
)
from .embedding import Embedding, l2_normalize, normalized_mean
from .errors import (
    BackendError,
    CandidateImageError,
    ConfigError,
    DatasetFormatError,
    DegenerateFusionError,
    EvaluationAborted,
    VwsdError,
)
from .estimator import VwsdRanker
from .evaluation import (
    EvalReport,
    compute_hit_rate,
    compute_mrr,
    evaluate,
    run_ablation,
    tune_hyperparameters,
)
from .lexical import (
    LexicalEntry,
    LexicalResource,
    StaticLexicon,
    WordNetLexicon,
    blend_definition,
    candidate_definitions,
    lookup_synonym,
    select_definition,
)
from .prompts import (
    FusionWeights,
    PromptBundle,
    build_photo_prompts,
    build_prompt_bundle,
    build_semantic_prompts,
    channel_embedding,
    fuse_channels,
    multilingual_channel_embedding,
)
from .ranking import RankingResult, cosine, rank_candidates
from .translate import IdentityTranslator, Translator

__version__ = "0.1.0"

__all__ = [
    "AugmentationProfile",
    "BackendDescriptor",
    "BackendError",
    "CANDIDATES_PER_SAMPLE",
    "CandidateImageError",
    "ConfigError",
    "DatasetFormatError",
    "DegenerateFusionError",
    "Embedding",
    "EmbeddingBackend",
    "EvalReport",
    "EvaluationAborted",
    "FusionWeights",
    "IdentityTranslator",
    "LexicalEntry",
    "LexicalResource",
    "MockBackend",
    "PipelineConfig",
    "PromptBundle",
    "RankingResult",
    "Sample",
    "SampleSet",
    "StaticLexicon",
    "Translator",
    "ViewSet",
    "VwsdError",
    "VwsdRanker",
    "WordNetLexicon",
    "aggregate_image_embedding",
    "apply_overrides",
    "blend_definition",
    "build_photo_prompts",
    "build_prompt_bundle",
    "build_semantic_prompts",
    "candidate_definitions",
    "channel_embedding",
    "compute_hit_rate",
    "compute_mrr",
    "cosine",
    "create_backend",
    "evaluate",
    "fuse_channels",
    "generate_views",
    "l2_normalize",
    "load_config",
    "load_dataset",
    "lookup_synonym",
    "multilingual_channel_embedding",
    "normalized_mean",
    "rank_candidates",
    "run_ablation",
    "save_dataset",
    "select_definition",
    "split_train_validation",
    "tune_hyperparameters",
]
