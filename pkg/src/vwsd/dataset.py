"""Loading, validation, and splitting of the tab-separated disambiguation dataset.

On-disk format:
  data file:  UTF-8 TSV, one sample per line with columns
              [target_word, context_phrase, image_1 .. image_10]
  gold file:  UTF-8, one gold image filename per line, aligned with the
              data file line by line.

Image references are stored relative to ``image_root`` and resolved lazily,
so a loaded manifest stays relocatable.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

from .errors import DatasetFormatError
from .validation import check_fraction_open

logger = logging.getLogger(__name__)

CANDIDATES_PER_SAMPLE = 10

SPLIT_NAMES = ("trial", "train", "test", "custom")

_IMAGE_EXTENSIONS = {
    ".jpg", ".jpeg", ".png", ".gif", ".bmp", ".webp", ".tif", ".tiff",
}


@dataclass(frozen=True)
class Sample:
    """One disambiguation instance: a word in context plus 10 candidate images."""

    id: str
    target_word: str
    context_phrase: str
    candidates: tuple[str, ...]
    gold_index: int | None = None

    def __post_init__(self):
        if not self.target_word:
            raise ValueError("target_word must be nonempty")
        if not self.context_phrase:
            raise ValueError("context_phrase must be nonempty")
        if len(self.candidates) != CANDIDATES_PER_SAMPLE:
            raise ValueError(
                f"sample {self.id!r} has {len(self.candidates)} candidates, "
                f"expected {CANDIDATES_PER_SAMPLE}"
            )
        if self.gold_index is not None and not 0 <= self.gold_index < CANDIDATES_PER_SAMPLE:
            raise ValueError(f"gold_index {self.gold_index} out of range for sample {self.id!r}")

    def target_in_phrase(self) -> bool:
        """Whether the target word appears as a whitespace-delimited token."""
        tokens = [t.lower() for t in self.context_phrase.split()]
        return self.target_word.lower() in tokens


@dataclass(frozen=True)
class SampleSet:
    """An ordered, immutable collection of samples tied to an image directory."""

    samples: tuple[Sample, ...]
    split_name: str = "custom"
    image_root: Path = field(default_factory=Path)

    def __post_init__(self):
        if self.split_name not in SPLIT_NAMES:
            raise ValueError(f"split_name must be one of {SPLIT_NAMES}, got {self.split_name!r}")
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "image_root", Path(self.image_root))
        ids = [s.id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("sample ids must be unique within a set")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    def resolve_image(self, ref: str) -> Path:
        return self.image_root / ref


def _looks_like_header(fields: Sequence[str]) -> bool:
    # A data line always carries image filenames from column 3 onward; a
    # header line does not. Extension sniffing keeps the check cheap.
    return not any(Path(f).suffix.lower() in _IMAGE_EXTENSIONS for f in fields[2:])


def load_dataset(
    data_path: str | Path,
    gold_path: str | Path | None = None,
    image_root: str | Path | None = None,
    split_name: str = "custom",
) -> SampleSet:
    """Load a sample manifest, optionally joining gold labels.

    The gold file must have exactly one filename per data line; the gold
    index is resolved by matching that filename against the line's
    candidate list. An optional single header line in the data file is
    skipped. All format violations are fatal and name the offending line.
    """
    data_path = Path(data_path)
    image_root = Path(image_root) if image_root is not None else data_path.parent

    raw_lines = data_path.read_text(encoding="utf-8").splitlines()
    data_rows: list[tuple[int, list[str]]] = []  # (1-based line number, fields)
    for line_no, line in enumerate(raw_lines, start=1):
        if not line.strip():
            continue
        data_rows.append((line_no, line.split("\t")))

    if data_rows and _looks_like_header(data_rows[0][1]):
        logger.info("skipping header line in %s", data_path)
        data_rows = data_rows[1:]

    gold_names: list[str] | None = None
    if gold_path is not None:
        gold_lines = Path(gold_path).read_text(encoding="utf-8").splitlines()
        gold_names = [line.strip() for line in gold_lines if line.strip()]
        if len(gold_names) != len(data_rows):
            raise DatasetFormatError(
                f"{data_path} has {len(data_rows)} samples but {gold_path} has "
                f"{len(gold_names)} gold lines"
            )

    samples: list[Sample] = []
    for idx, (line_no, fields) in enumerate(data_rows):
        if len(fields) < 2 + CANDIDATES_PER_SAMPLE:
            raise DatasetFormatError(
                f"{data_path} line {line_no}: expected {2 + CANDIDATES_PER_SAMPLE} "
                f"tab-separated columns, found {len(fields)}"
            )
        target, phrase = fields[0].strip(), fields[1].strip()
        candidates = tuple(f.strip() for f in fields[2:])
        if len(candidates) != CANDIDATES_PER_SAMPLE:
            raise DatasetFormatError(
                f"{data_path} line {line_no}: expected {CANDIDATES_PER_SAMPLE} "
                f"candidate images, found {len(candidates)}"
            )
        gold_index = None
        if gold_names is not None:
            gold = gold_names[idx]
            if gold not in candidates:
                raise DatasetFormatError(
                    f"{data_path} line {line_no}: gold image {gold!r} is not among "
                    f"the line's candidates"
                )
            gold_index = candidates.index(gold)
        try:
            sample = Sample(
                id=f"{split_name}-{idx:05d}",
                target_word=target,
                context_phrase=phrase,
                candidates=candidates,
                gold_index=gold_index,
            )
        except ValueError as exc:
            raise DatasetFormatError(f"{data_path} line {line_no}: {exc}") from exc
        if not sample.target_in_phrase():
            # Morphological variants occur in real data; warn, do not fail.
            logger.warning(
                "%s line %d: target %r is not a token of context phrase %r",
                data_path, line_no, target, phrase,
            )
        samples.append(sample)

    return SampleSet(samples=tuple(samples), split_name=split_name, image_root=image_root)


def save_dataset(
    sample_set: SampleSet,
    data_path: str | Path,
    gold_path: str | Path | None = None,
) -> None:
    """Serialize a sample set back to the TSV + gold file layout."""
    data_lines = []
    gold_lines = []
    for sample in sample_set:
        data_lines.append("\t".join([sample.target_word, sample.context_phrase, *sample.candidates]))
        if gold_path is not None:
            if sample.gold_index is None:
                raise DatasetFormatError(f"sample {sample.id!r} has no gold index to serialize")
            gold_lines.append(sample.candidates[sample.gold_index])
    Path(data_path).write_text("\n".join(data_lines) + "\n", encoding="utf-8")
    if gold_path is not None:
        Path(gold_path).write_text("\n".join(gold_lines) + "\n", encoding="utf-8")


def split_train_validation(
    sample_set: SampleSet, fraction: float, seed: int
) -> tuple[SampleSet, SampleSet]:
    """Randomly partition a set into ⌈N·fraction⌉ train and remainder validation.

    Deterministic under a fixed seed; both halves preserve the original
    sample order.
    """
    check_fraction_open(fraction, "fraction")
    n = len(sample_set)
    if n == 0:
        raise ValueError("cannot split an empty sample set")
    take = math.ceil(n * fraction)
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    train_idx = sorted(indices[:take])
    val_idx = sorted(indices[take:])
    train = replace(
        sample_set, samples=tuple(sample_set.samples[i] for i in train_idx), split_name="custom"
    )
    val = replace(
        sample_set, samples=tuple(sample_set.samples[i] for i in val_idx), split_name="custom"
    )
    return train, val
