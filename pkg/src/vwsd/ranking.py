"""Cosine scoring of the 10 candidates and full-ranking assembly."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CANDIDATES_PER_SAMPLE
from .embedding import Embedding
from .validation import check_embedding, check_same_dim

SCORE_EPS = 1e-6


def cosine(a: Embedding, b: Embedding) -> float:
    """a·b / (‖a‖‖b‖). Zero vectors are an error."""
    check_embedding(a, "a")
    check_embedding(b, "b")
    check_same_dim(a, b)
    na = float(np.linalg.norm(a.values))
    nb = float(np.linalg.norm(b.values))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity of a zero vector is undefined")
    return float(np.dot(a.values, b.values) / (na * nb))


@dataclass(frozen=True)
class RankingResult:
    """Scores and the induced candidate ordering for one sample."""

    scores: tuple[float, ...]
    order: tuple[int, ...]
    predicted_index: int
    gold_rank: int | None = None

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.scores))):
            raise ValueError("order must be a permutation of the candidate indices")
        if self.predicted_index != self.order[0]:
            raise ValueError("predicted_index must be the top of the ranking")
        if any(abs(s) > 1.0 + SCORE_EPS for s in self.scores):
            raise ValueError("cosine scores must lie within [-1, 1]")


def rank_candidates(
    text_embedding: Embedding,
    image_embeddings: list[Embedding],
    gold_index: int | None = None,
) -> RankingResult:
    """Sort the candidates by descending cosine similarity to the text.

    Exact ties break toward the lowest candidate index. When ``gold_index``
    is given, ``gold_rank`` is its 1-based position in the ordering.
    """
    if len(image_embeddings) != CANDIDATES_PER_SAMPLE:
        raise ValueError(
            f"expected {CANDIDATES_PER_SAMPLE} image embeddings, got {len(image_embeddings)}"
        )
    scores = tuple(cosine(text_embedding, e) for e in image_embeddings)
    order = tuple(sorted(range(len(scores)), key=lambda j: (-scores[j], j)))
    gold_rank = None
    if gold_index is not None:
        if not 0 <= gold_index < CANDIDATES_PER_SAMPLE:
            raise ValueError(f"gold_index {gold_index} out of range")
        gold_rank = order.index(gold_index) + 1
    return RankingResult(
        scores=scores,
        order=order,
        predicted_index=order[0],
        gold_rank=gold_rank,
    )
