"""Tests for ranking and CTR metrics.

Verifies:
- MRR, HR@k and NDCG on known ranks
- AUC against a pairwise oracle, ties included, exactly on random inputs
- Clamped logloss
- Errors on undefined inputs
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from lorentzfm.evaluation import (
    RankingResult,
    UndefinedMetricError,
    auc,
    hit_rate_at,
    logloss,
    mrr,
    ndcg,
)


def _pairwise_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    pos = scores[labels > 0]
    neg = scores[labels <= 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


class TestRankingMetrics:
    """Tests for rank-based metrics."""

    def test_mrr(self) -> None:
        """Ranks 2 and 4 give (1/2 + 1/4) / 2."""
        assert mrr([2, 4]) == pytest.approx(0.375)

    def test_hit_rate(self) -> None:
        """Rank 10 is a hit at 10, rank 11 is not."""
        assert hit_rate_at([1, 10, 11], k=10) == pytest.approx(2 / 3)
        assert hit_rate_at([1, 10, 11], k=1) == pytest.approx(1 / 3)

    def test_ndcg(self) -> None:
        """Rank 3 gives 1 / log2(4) = 0.5."""
        assert ndcg([3]) == pytest.approx(0.5)
        assert ndcg([1]) == 1.0

    def test_accepts_ranking_results(self) -> None:
        """RankingResult objects work as input."""
        results = [RankingResult(rank=1.5, candidates=2), RankingResult(rank=1.0, candidates=5)]
        assert mrr(results) == pytest.approx((1 / 1.5 + 1.0) / 2)

    def test_empty_input(self) -> None:
        """No ranks, no metric."""
        with pytest.raises(UndefinedMetricError):
            mrr([])

    def test_ranks_are_one_based(self) -> None:
        """A rank of 0 is invalid."""
        with pytest.raises(ValueError):
            ndcg([0])

    def test_invalid_k(self) -> None:
        """k must be positive."""
        with pytest.raises(ValueError):
            hit_rate_at([1], k=0)


class TestAuc:
    """Tests for AUC."""

    def test_known_value(self) -> None:
        """Three of four positive/negative pairs are ordered correctly."""
        assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)

    def test_matches_pairwise_oracle(self) -> None:
        """Mid-rank AUC equals the O(N^2) count with ties as one half."""
        rng = np.random.default_rng(7)
        for _ in range(5):
            scores = rng.integers(0, 6, size=60).astype(float)
            labels = rng.integers(0, 2, size=60)
            assert auc(scores, labels) == pytest.approx(_pairwise_auc(scores, labels), abs=1e-12)

    def test_exact_against_pairwise_oracle(self) -> None:
        """1000 random inputs of up to 200 scores agree exactly with the pair count."""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            n = int(rng.integers(2, 201))
            # Few distinct values so that ties are common.
            scores = rng.integers(0, int(rng.integers(1, 12)), size=n).astype(float)
            labels = rng.integers(0, 2, size=n)
            labels[:2] = [0, 1]
            pos, neg = scores[labels == 1], scores[labels == 0]
            wins = int((pos[:, None] > neg[None, :]).sum())
            ties = int((pos[:, None] == neg[None, :]).sum())
            expected = Fraction(2 * wins + ties, 2 * len(pos) * len(neg))
            assert auc(scores, labels) == float(expected)

    def test_all_tied(self) -> None:
        """Constant scores give 0.5."""
        assert auc(np.zeros(10), [0, 1] * 5) == pytest.approx(0.5)

    def test_perfect_and_inverted(self) -> None:
        """Perfect ordering is 1, reversed ordering 0."""
        assert auc([0.1, 0.2, 0.9], [0, 0, 1]) == 1.0
        assert auc([0.9, 0.2, 0.1], [0, 0, 1]) == 0.0

    def test_single_class(self) -> None:
        """AUC is undefined without both classes."""
        with pytest.raises(UndefinedMetricError):
            auc([0.1, 0.2], [1, 1])


class TestLogloss:
    """Tests for logloss."""

    def test_coin_flip(self) -> None:
        """p = 0.5 everywhere costs ln 2."""
        assert logloss([0.5, 0.5], [0, 1]) == pytest.approx(math.log(2))

    def test_clamped(self) -> None:
        """Confident mistakes are bounded by -ln(eps)."""
        value = logloss([0.0, 1.0], [1, 0])
        assert math.isfinite(value)
        assert value == pytest.approx(-math.log(1e-7), rel=1e-6)

    def test_empty(self) -> None:
        """Empty inputs are undefined."""
        with pytest.raises(UndefinedMetricError):
            logloss([], [])
