"""Pipeline configuration: documented keys, file loading, and overrides.

A configuration is a flat key/value mapping. The file format is a flat JSON
object; every key maps 1:1 onto a PipelineConfig field. CLI flag overrides
name the same keys.

Documented keys (defaults in parentheses):

  backend ("mock")                mock | clip
  model_id (null)                 checkpoint id/path for the clip backend
  device ("cpu")                  device for clip/marian models
  mock_embedding_dim (512)        mock backend vector size
  mock_image_resolution (224)     mock backend input resolution

  prompts_enabled (true)          dual-channel prompt ensemble on/off;
                                  off = plain contextual text embedding
  semantic_channel (true)         enable the semantic prompt channel
  photo_channel (true)            enable the photo prompt channel
  beta_p (0.5)                    photo channel fusion weight, in [0, 1]
  beta_s (0.5)                    semantic channel fusion weight, in [0, 1]
  semantic_templates_file (null)  override file, one template per line
  photo_templates_file (null)     override file, one template per line
  synonym_templates_file (null)   override file, one template per line
  synonym_prompts (true)          add synonym photo prompts when a lexicon
                                  is configured
  vanilla_pooling ("target")      target | whole: text pooling when prompts
                                  are disabled

  lexicon ("none")                none | wordnet | path to a static lexicon
  definitions_enabled (false)     blend the best-matching definition
  alpha (0.15)                    definition blend weight, in [0, 1]
  include_synonym_definitions (false)
  synonym_count (2)               synonyms contributing definitions

  augmentations_enabled (false)   multi-view image aggregation on/off;
                                  off = single original view per image
  views_tta (5) / views_geometric (3) / views_photometric (3) /
  views_multicrop (4) / views_grid (9) / views_midquadrant (4)
  rotation_min_degrees (-7.0) / rotation_max_degrees (7.0)
  brightness_jitter (0.2) / color_jitter (0.2) / blur_radius (1.0)
  zoom_scale (0.75) / center_crop_scale (0.875)
  slight_crop_min (0.9) / slight_crop_max (1.0)
  tau (1.0)                       temperature divisor for the view mean;
                                  inert under the final normalization

  translation_enabled (false)     pool prompt translations into channels
  translator ("marian")           marian | identity
  languages ([])                  language codes, list or comma string

  seed (0)                        base seed for stochastic views
  workers (1)                     concurrent samples during evaluation
  collect_timings (true)          record latency statistics in reports
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .augment import DEFAULT_VIEW_COUNTS, AugmentationProfile
from .errors import ConfigError


@dataclass(frozen=True)
class PipelineConfig:
    backend: str = "mock"
    model_id: str | None = None
    device: str = "cpu"
    mock_embedding_dim: int = 512
    mock_image_resolution: int = 224

    prompts_enabled: bool = True
    semantic_channel: bool = True
    photo_channel: bool = True
    beta_p: float = 0.5
    beta_s: float = 0.5
    semantic_templates_file: str | None = None
    photo_templates_file: str | None = None
    synonym_templates_file: str | None = None
    synonym_prompts: bool = True
    vanilla_pooling: str = "target"

    lexicon: str = "none"
    definitions_enabled: bool = False
    alpha: float = 0.15
    include_synonym_definitions: bool = False
    synonym_count: int = 2

    augmentations_enabled: bool = False
    views_tta: int = DEFAULT_VIEW_COUNTS["tta"]
    views_geometric: int = DEFAULT_VIEW_COUNTS["geometric"]
    views_photometric: int = DEFAULT_VIEW_COUNTS["photometric"]
    views_multicrop: int = DEFAULT_VIEW_COUNTS["multicrop"]
    views_grid: int = DEFAULT_VIEW_COUNTS["grid"]
    views_midquadrant: int = DEFAULT_VIEW_COUNTS["midquadrant"]
    rotation_min_degrees: float = -7.0
    rotation_max_degrees: float = 7.0
    brightness_jitter: float = 0.2
    color_jitter: float = 0.2
    blur_radius: float = 1.0
    zoom_scale: float = 0.75
    center_crop_scale: float = 0.875
    slight_crop_min: float = 0.90
    slight_crop_max: float = 1.0
    tau: float = 1.0

    translation_enabled: bool = False
    translator: str = "marian"
    languages: tuple[str, ...] = ()

    seed: int = 0
    workers: int = 1
    collect_timings: bool = True

    def __post_init__(self):
        object.__setattr__(self, "languages", tuple(self.languages))
        self.validate()

    def validate(self) -> None:
        if self.backend not in ("mock", "clip"):
            raise ConfigError(f"backend must be 'mock' or 'clip', got {self.backend!r}")
        if self.prompts_enabled and not (self.semantic_channel or self.photo_channel):
            raise ConfigError("at least one text channel must be enabled")
        for name in ("beta_p", "beta_s", "alpha"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.semantic_channel and self.photo_channel and self.beta_p + self.beta_s <= 0:
            raise ConfigError("beta_p + beta_s must be positive when both channels are enabled")
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.synonym_count < 0:
            raise ConfigError("synonym_count must be nonnegative")
        if self.vanilla_pooling not in ("target", "whole"):
            raise ConfigError("vanilla_pooling must be 'target' or 'whole'")
        if self.translator not in ("marian", "identity"):
            raise ConfigError("translator must be 'marian' or 'identity'")
        if self.translation_enabled and not self.languages:
            raise ConfigError("translation_enabled requires a nonempty languages list")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.mock_embedding_dim < 1 or self.mock_image_resolution < 1:
            raise ConfigError("mock backend dimensions must be positive")
        if self.augmentations_enabled and self.total_views < 1:
            raise ConfigError("augmentation profile must produce at least one view")
        if self.rotation_min_degrees > self.rotation_max_degrees:
            raise ConfigError("rotation_min_degrees must not exceed rotation_max_degrees")
        if not 0 < self.slight_crop_min <= self.slight_crop_max <= 1:
            raise ConfigError("slight crop bounds must satisfy 0 < min <= max <= 1")

    @property
    def view_counts(self) -> dict[str, int]:
        return {
            "tta": self.views_tta,
            "geometric": self.views_geometric,
            "photometric": self.views_photometric,
            "multicrop": self.views_multicrop,
            "grid": self.views_grid,
            "midquadrant": self.views_midquadrant,
        }

    @property
    def total_views(self) -> int:
        return sum(self.view_counts.values()) if self.augmentations_enabled else 1

    def augmentation_profile(self, view_size: int) -> AugmentationProfile:
        """The view profile this config implies, at the backend's input size.

        With augmentations disabled this is exactly the original image.
        """
        if not self.augmentations_enabled:
            return AugmentationProfile.single_view(view_size=view_size, seed=self.seed)
        return AugmentationProfile(
            strategy_counts=self.view_counts,
            seed=self.seed,
            view_size=view_size,
            rotation_range_degrees=(self.rotation_min_degrees, self.rotation_max_degrees),
            brightness_jitter=self.brightness_jitter,
            color_jitter=self.color_jitter,
            blur_radius=self.blur_radius,
            zoom_scale=self.zoom_scale,
            center_crop_scale=self.center_crop_scale,
            slight_crop_range=(self.slight_crop_min, self.slight_crop_max),
        )

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["languages"] = list(self.languages)
        return out

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def documented_keys() -> tuple[str, ...]:
    return tuple(_FIELDS)


def _coerce(key: str, value: Any) -> Any:
    """Parse a raw (possibly string) value into the field's type."""
    if key == "languages":
        if isinstance(value, str):
            value = [p.strip() for p in value.split(",") if p.strip()]
        if not isinstance(value, (list, tuple)):
            raise ConfigError("languages must be a list or comma-separated string")
        return tuple(str(v) for v in value)
    target_type = _FIELDS[key].type
    if value is None:
        if "None" in str(target_type):
            return None
        raise ConfigError(f"config key {key!r} does not accept null")
    if isinstance(value, str) and "str" not in str(target_type):
        try:
            value = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse value {value!r} for config key {key!r}") from exc
    if "bool" in str(target_type):
        if not isinstance(value, bool):
            raise ConfigError(f"config key {key!r} expects a boolean, got {value!r}")
        return value
    if "int" in str(target_type):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"config key {key!r} expects an integer, got {value!r}")
        return int(value)
    if "float" in str(target_type):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key {key!r} expects a number, got {value!r}")
        return float(value)
    return str(value)


def config_from_mapping(mapping: Mapping[str, Any]) -> PipelineConfig:
    """Build a config from a flat mapping, rejecting unknown keys."""
    unknown = sorted(set(mapping) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    kwargs = {key: _coerce(key, value) for key, value in mapping.items()}
    return PipelineConfig(**kwargs)


def load_config(path: str | Path) -> PipelineConfig:
    """Load a flat JSON config file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must contain a JSON object")
    return config_from_mapping(raw)


def apply_overrides(config: PipelineConfig, overrides: Mapping[str, Any]) -> PipelineConfig:
    """Apply flag overrides (raw strings allowed) on top of a config."""
    unknown = sorted(set(overrides) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    changes = {key: _coerce(key, value) for key, value in overrides.items()}
    return config.replace(**changes)
