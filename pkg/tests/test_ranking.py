import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vwsd import Embedding, RankingResult, cosine, rank_candidates


def unit(values):
    values = np.asarray(values, dtype=float)
    return Embedding(values / np.linalg.norm(values), normalized=True)


def random_unit(rng, dim=8):
    return unit(rng.standard_normal(dim))


class TestCosine:
    def test_self_similarity_is_one(self):
        v = unit([1, 2, 3])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_antiparallel_is_minus_one(self):
        v = unit([1, 2, 3])
        assert cosine(v, Embedding(-v.values, normalized=True)) == pytest.approx(-1.0)

    def test_orthonormal_basis_vectors(self):
        e1 = unit([1, 0, 0])
        e2 = unit([0, 1, 0])
        assert cosine(e1, e2) == pytest.approx(0.0)

    def test_zero_vector_is_an_error(self):
        zero = Embedding(np.zeros(3))
        with pytest.raises(ValueError):
            cosine(zero, unit([1, 0, 0]))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cosine(unit([1, 0]), unit([1, 0, 0]))


def embeddings_where_gold_matches(text, gold_index, dim=12):
    embs = []
    for j in range(10):
        v = np.zeros(dim)
        if j == gold_index:
            embs.append(text)
        else:
            v[j % dim] = 1.0
            v[(j + 1) % dim] = -0.5
            embs.append(unit(v))
    return embs


class TestRankCandidates:
    def test_identical_embedding_wins(self):
        text = unit(np.arange(1, 13))
        embs = embeddings_where_gold_matches(text, gold_index=6)
        result = rank_candidates(text, embs, gold_index=6)
        assert result.predicted_index == 6
        assert result.gold_rank == 1

    def test_all_identical_tie_breaks_to_lowest_index(self):
        text = unit([1, 1, 0])
        embs = [text] * 10
        result = rank_candidates(text, embs, gold_index=7)
        assert result.predicted_index == 0
        assert result.order == tuple(range(10))
        assert result.gold_rank == 8

    def test_matches_independent_sort(self):
        rng = np.random.default_rng(42)
        text = random_unit(rng)
        embs = [random_unit(rng) for _ in range(10)]
        result = rank_candidates(text, embs, gold_index=3)
        sims = [float(np.dot(text.values, e.values)) for e in embs]
        expected_order = sorted(range(10), key=lambda j: (-sims[j], j))
        assert list(result.order) == expected_order
        assert result.scores == pytest.approx(tuple(sims))

    def test_wrong_candidate_count_rejected(self):
        text = unit([1, 0])
        with pytest.raises(ValueError):
            rank_candidates(text, [text] * 9)

    def test_scale_invariance_of_the_whole_result(self):
        rng = np.random.default_rng(7)
        text_raw = rng.standard_normal(8)
        embs_raw = [rng.standard_normal(8) for _ in range(10)]
        base = rank_candidates(
            Embedding(text_raw), [Embedding(e) for e in embs_raw], gold_index=2
        )
        scaled = rank_candidates(
            Embedding(4.0 * text_raw), [Embedding(0.25 * e) for e in embs_raw], gold_index=2
        )
        assert scaled.order == base.order
        assert scaled.predicted_index == base.predicted_index
        assert scaled.gold_rank == base.gold_rank
        np.testing.assert_allclose(scaled.scores, base.scores, atol=1e-12)

    @given(seed=st.integers(min_value=0, max_value=100_000),
           gold=st.integers(min_value=0, max_value=9))
    @settings(max_examples=150, deadline=None)
    def test_ranking_properties(self, seed, gold):
        rng = np.random.default_rng(seed)
        text = random_unit(rng)
        embs = [random_unit(rng) for _ in range(10)]
        result = rank_candidates(text, embs, gold_index=gold)
        assert sorted(result.order) == list(range(10))
        assert (result.gold_rank == 1) == (result.predicted_index == gold)
        assert all(-1 - 1e-6 <= s <= 1 + 1e-6 for s in result.scores)
        sims = [float(np.dot(text.values, e.values)) for e in embs]
        assert list(result.order) == sorted(range(10), key=lambda j: (-sims[j], j))


class TestRankingResultInvariants:
    def test_order_must_be_permutation(self):
        with pytest.raises(ValueError):
            RankingResult(scores=(0.0,) * 10, order=(0,) * 10, predicted_index=0)

    def test_predicted_must_top_the_order(self):
        with pytest.raises(ValueError):
            RankingResult(scores=tuple(float(i) / 10 for i in range(10)),
                          order=tuple(range(10)), predicted_index=3)

    def test_scores_bounded(self):
        with pytest.raises(ValueError):
            RankingResult(scores=(2.0,) + (0.0,) * 9, order=tuple(range(10)),
                          predicted_index=0)
