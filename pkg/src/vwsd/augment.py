"""Multi-view expansion of candidate images and view-embedding aggregation.

Six strategies, always applied in this order:

  tta          baseline views: original, mirror, center crop, zoom-in, grayscale
  geometric    stochastic flip, small random rotation, random slight crop
  photometric  brightness jitter, contrast+saturation jitter, mild blur
  multicrop    the four deterministic quadrant crops
  grid         the 3x3 patch tiling
  midquadrant  left/right/top/bottom mid-edge crops

The default view counts (5, 3, 3, 4, 9, 4) total 28. Crops are taken at the
source resolution and resized once to the backend's input size, so they are
never degraded by double resampling. Stochastic draws come from a per-image
generator seeded by (profile seed, image reference), which keeps runs
reproducible regardless of evaluation order or concurrency.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from PIL import Image, ImageEnhance, ImageFilter, ImageOps

from .embedding import Embedding, normalized_mean
from .errors import BackendError, ConfigError
from .validation import check_positive

logger = logging.getLogger(__name__)

STRATEGY_ORDER = ("tta", "geometric", "photometric", "multicrop", "grid", "midquadrant")

DEFAULT_VIEW_COUNTS: dict[str, int] = {
    "tta": 5,
    "geometric": 3,
    "photometric": 3,
    "multicrop": 4,
    "grid": 9,
    "midquadrant": 4,
}

_DETERMINISTIC_LIMITS = {"tta": 5, "multicrop": 4, "grid": 9, "midquadrant": 4}


@dataclass(frozen=True)
class AugmentationProfile:
    """How many views each strategy contributes, and their parameters."""

    strategy_counts: Mapping[str, int] = field(
        default_factory=lambda: dict(DEFAULT_VIEW_COUNTS)
    )
    seed: int = 0
    view_size: int = 224
    rotation_range_degrees: tuple[float, float] = (-7.0, 7.0)
    brightness_jitter: float = 0.2
    color_jitter: float = 0.2
    blur_radius: float = 1.0
    zoom_scale: float = 0.75
    center_crop_scale: float = 0.875
    slight_crop_range: tuple[float, float] = (0.90, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "strategy_counts", dict(self.strategy_counts))
        for name, count in self.strategy_counts.items():
            if name not in STRATEGY_ORDER:
                raise ConfigError(f"unknown augmentation strategy {name!r}")
            if count < 0:
                raise ConfigError(f"negative view count for strategy {name!r}")
            limit = _DETERMINISTIC_LIMITS.get(name)
            if limit is not None and count > limit:
                raise ConfigError(f"strategy {name!r} offers at most {limit} views, got {count}")
        if self.total_views < 1:
            raise ConfigError("an augmentation profile must produce at least one view")
        if self.view_size < 1:
            raise ConfigError("view_size must be positive")
        lo, hi = self.rotation_range_degrees
        if lo > hi:
            raise ConfigError("rotation range must be ordered (min, max)")
        lo, hi = self.slight_crop_range
        if not 0 < lo <= hi <= 1:
            raise ConfigError("slight crop range must satisfy 0 < min <= max <= 1")
        for name in ("zoom_scale", "center_crop_scale"):
            if not 0 < getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in (0, 1]")

    @property
    def total_views(self) -> int:
        return sum(self.strategy_counts.values())

    @classmethod
    def single_view(cls, view_size: int = 224, seed: int = 0) -> "AugmentationProfile":
        """A profile of exactly the original image (resized only)."""
        return cls(strategy_counts={"tta": 1}, seed=seed, view_size=view_size)


@dataclass
class ViewSet:
    """Ordered views of one image with (strategy, parameters) provenance."""

    views: list[Image.Image]
    provenance: list[tuple[str, dict]]

    def __post_init__(self):
        if len(self.views) != len(self.provenance):
            raise ValueError("every view needs a provenance label")

    def __len__(self) -> int:
        return len(self.views)

    def strategy_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for name, _ in self.provenance:
            counts[name] = counts.get(name, 0) + 1
        return counts


def _image_rng(profile: AugmentationProfile, image: Image.Image,
               image_ref: str | None) -> np.random.Generator:
    payload = image_ref.encode("utf-8") if image_ref else image.tobytes()
    digest = hashlib.blake2b(
        profile.seed.to_bytes(8, "big", signed=True) + b"\x00" + payload, digest_size=8
    ).digest()
    return np.random.default_rng(int.from_bytes(digest, "big"))


def _to_view(image: Image.Image, size: int) -> Image.Image:
    if image.size == (size, size):
        return image.copy()
    return image.resize((size, size), Image.Resampling.BICUBIC)


def _whole_image_fallback(image: Image.Image, strategy: str, kinds: list[str]):
    logger.warning(
        "image %s too small for %s crops; using whole-image copies", image.size, strategy
    )
    return [(image.copy(), {"view": kind, "fallback": True}) for kind in kinds]


def _center_box(w: int, h: int, scale: float) -> tuple[int, int, int, int]:
    cw, ch = max(1, round(w * scale)), max(1, round(h * scale))
    x0, y0 = (w - cw) // 2, (h - ch) // 2
    return (x0, y0, x0 + cw, y0 + ch)


def _tta_views(image, profile, count):
    w, h = image.size
    catalog = [
        ("original", {}, lambda: image),
        ("mirror", {}, lambda: ImageOps.mirror(image)),
        (
            "center_crop",
            {"scale": profile.center_crop_scale},
            lambda: image.crop(_center_box(w, h, profile.center_crop_scale)),
        ),
        (
            "zoom",
            {"scale": profile.zoom_scale},
            lambda: image.crop(_center_box(w, h, profile.zoom_scale)),
        ),
        ("grayscale", {}, lambda: ImageOps.grayscale(image).convert("RGB")),
    ]
    out = []
    for kind, params, make in catalog[:count]:
        out.append((make(), {"view": kind, **params}))
    return out


def _geometric_views(image, profile, count, rng):
    w, h = image.size

    def flip():
        flipped = bool(rng.random() < 0.5)
        return (ImageOps.mirror(image) if flipped else image.copy(), {"view": "flip", "flipped": flipped})

    def rotate():
        lo, hi = profile.rotation_range_degrees
        angle = float(rng.uniform(lo, hi))
        rotated = image.rotate(angle, resample=Image.Resampling.BICUBIC)
        return (rotated, {"view": "rotation", "angle_degrees": angle})

    def slight_crop():
        lo, hi = profile.slight_crop_range
        scale = float(rng.uniform(lo, hi))
        cw, ch = max(1, round(w * scale)), max(1, round(h * scale))
        x0 = int(rng.integers(0, w - cw + 1))
        y0 = int(rng.integers(0, h - ch + 1))
        return (image.crop((x0, y0, x0 + cw, y0 + ch)),
                {"view": "slight_crop", "scale": scale, "x0": x0, "y0": y0})

    ops = (flip, rotate, slight_crop)
    return [ops[i % len(ops)]() for i in range(count)]


def _photometric_views(image, profile, count, rng):
    def brightness():
        factor = float(1.0 + rng.uniform(-profile.brightness_jitter, profile.brightness_jitter))
        return (ImageEnhance.Brightness(image).enhance(factor),
                {"view": "brightness", "factor": factor})

    def contrast_saturation():
        c = float(1.0 + rng.uniform(-profile.color_jitter, profile.color_jitter))
        s = float(1.0 + rng.uniform(-profile.color_jitter, profile.color_jitter))
        adjusted = ImageEnhance.Color(ImageEnhance.Contrast(image).enhance(c)).enhance(s)
        return (adjusted, {"view": "contrast_saturation", "contrast": c, "saturation": s})

    def blur():
        return (image.filter(ImageFilter.GaussianBlur(profile.blur_radius)),
                {"view": "blur", "radius": profile.blur_radius})

    ops = (brightness, contrast_saturation, blur)
    return [ops[i % len(ops)]() for i in range(count)]


def _multicrop_views(image, profile, count):
    w, h = image.size
    kinds = ["top_left", "top_right", "bottom_left", "bottom_right"][:count]
    if w < 2 or h < 2:
        return _whole_image_fallback(image, "multicrop", kinds)
    xm, ym = w // 2, h // 2
    boxes = {
        "top_left": (0, 0, xm, ym),
        "top_right": (xm, 0, w, ym),
        "bottom_left": (0, ym, xm, h),
        "bottom_right": (xm, ym, w, h),
    }
    return [(image.crop(boxes[kind]), {"view": kind}) for kind in kinds]


def _grid_views(image, profile, count):
    w, h = image.size
    kinds = [f"patch_{row}{col}" for row in range(3) for col in range(3)][:count]
    if w < 3 or h < 3:
        return _whole_image_fallback(image, "grid", kinds)
    xs = [round(i * w / 3) for i in range(4)]
    ys = [round(j * h / 3) for j in range(4)]
    out = []
    for kind in kinds:
        row, col = int(kind[-2]), int(kind[-1])
        box = (xs[col], ys[row], xs[col + 1], ys[row + 1])
        out.append((image.crop(box), {"view": kind}))
    return out


def _midquadrant_views(image, profile, count):
    w, h = image.size
    kinds = ["left", "right", "top", "bottom"][:count]
    if w < 2 or h < 2:
        return _whole_image_fallback(image, "midquadrant", kinds)
    qw, qh = w // 2, h // 2
    xc, yc = (w - qw) // 2, (h - qh) // 2
    boxes = {
        "left": (0, yc, qw, yc + qh),
        "right": (w - qw, yc, w, yc + qh),
        "top": (xc, 0, xc + qw, qh),
        "bottom": (xc, h - qh, xc + qw, h),
    }
    return [(image.crop(boxes[kind]), {"view": kind}) for kind in kinds]


def generate_views(
    image: Image.Image,
    profile: AugmentationProfile,
    image_ref: str | None = None,
) -> ViewSet:
    """Expand one image into the profile's family of views.

    Deterministic strategies are byte-stable across runs; stochastic ones
    are byte-stable under a fixed profile seed. Passing ``image_ref`` keys
    the stochastic draws to the reference instead of the pixel bytes.
    """
    if image.mode != "RGB":
        image = image.convert("RGB")
    rng = _image_rng(profile, image, image_ref)
    counts = profile.strategy_counts
    views: list[Image.Image] = []
    provenance: list[tuple[str, dict]] = []
    for strategy in STRATEGY_ORDER:
        count = counts.get(strategy, 0)
        if count == 0:
            continue
        if strategy == "tta":
            produced = _tta_views(image, profile, count)
        elif strategy == "geometric":
            produced = _geometric_views(image, profile, count, rng)
        elif strategy == "photometric":
            produced = _photometric_views(image, profile, count, rng)
        elif strategy == "multicrop":
            produced = _multicrop_views(image, profile, count)
        elif strategy == "grid":
            produced = _grid_views(image, profile, count)
        else:
            produced = _midquadrant_views(image, profile, count)
        for view, params in produced:
            views.append(_to_view(view, profile.view_size))
            provenance.append((strategy, params))
    return ViewSet(views=views, provenance=provenance)


def aggregate_image_embedding(views: ViewSet, backend, tau: float = 1.0) -> Embedding:
    """Mean of the view embeddings, scaled by 1/tau, then L2-normalized.

    The temperature is mathematically inert (the normalization cancels it);
    it is accepted and passed through so configurations remain comparable.
    Views that fail to encode are dropped with a warning; all views failing
    is fatal.
    """
    check_positive(tau, "tau")
    if len(views) == 0:
        raise ValueError("cannot aggregate an empty view set")
    try:
        embeddings = backend.encode_image_batch(views.views)
    except BackendError:
        embeddings = []
        for view, label in zip(views.views, views.provenance):
            try:
                embeddings.append(backend.encode_image(view))
            except Exception as exc:
                logger.warning("dropping view %s: %s", label, exc)
        if not embeddings:
            raise BackendError("every view of the image failed to encode")
    return normalized_mean(embeddings, scale=1.0 / tau)


def save_views(views: ViewSet, out_dir: str | Path) -> list[Path]:
    """Write every view as a PNG with a strategy-labeled filename."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, (view, (strategy, params)) in enumerate(zip(views.views, views.provenance)):
        kind = params.get("view", "view")
        path = out_dir / f"{i:02d}_{strategy}_{kind}.png"
        view.save(path)
        written.append(path)
    return written
