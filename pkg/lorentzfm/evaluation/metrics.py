"""Ranking and CTR metrics.

Ranking metrics take 1-based ranks of the held-out positive among its
candidates; tied blocks get their mean rank, so ranks may be halves.
"""

from __future__ import annotations

from collections.abc import Iterable
from typing import Protocol

import numpy as np
import numpy.typing as npt

from lorentzfm.errors import DataError

LOGLOSS_EPS = 1e-7


class UndefinedMetricError(DataError):
    """Raised when a metric is undefined for its input (empty or one class)."""

    pass


class HasRank(Protocol):
    @property
    def rank(self) -> float: ...


def _ranks(results: Iterable[HasRank] | npt.ArrayLike) -> npt.NDArray[np.float64]:
    items = list(results) if not isinstance(results, np.ndarray) else results
    if isinstance(items, list) and items and hasattr(items[0], "rank"):
        ranks = np.array([r.rank for r in items], dtype=np.float64)
    else:
        ranks = np.asarray(items, dtype=np.float64).ravel()
    if ranks.size == 0:
        raise UndefinedMetricError("ranking metrics need at least one result")
    if np.any(ranks < 1):
        raise ValueError("ranks are 1-based")
    return ranks


def mrr(results: Iterable[HasRank] | npt.ArrayLike) -> float:
    """Mean reciprocal rank."""
    return float(np.mean(1.0 / _ranks(results)))


def hit_rate_at(results: Iterable[HasRank] | npt.ArrayLike, k: int = 10) -> float:
    """Share of results ranked within the top ``k`` (inclusive)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return float(np.mean(_ranks(results) <= k))


def ndcg(results: Iterable[HasRank] | npt.ArrayLike) -> float:
    """Mean ``1 / log2(rank + 1)``; one relevant item per result."""
    return float(np.mean(1.0 / np.log2(_ranks(results) + 1.0)))


def auc(scores: npt.ArrayLike, labels: npt.ArrayLike) -> float:
    """Area under the ROC curve, ties counted one half.

    Computed from mid-ranks of the pooled scores in O(N log N).

    Raises:
        UndefinedMetricError: If only one class is present.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel() > 0
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(f"AUC needs both classes, got {n_pos} positive and {n_neg} negative")

    _, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    below = np.cumsum(counts) - counts
    mid_rank = below + (counts + 1) / 2.0
    rank_sum = float(mid_rank[inverse.ravel()][y].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def logloss(probs: npt.ArrayLike, labels: npt.ArrayLike, eps: float = LOGLOSS_EPS) -> float:
    """Mean binary cross-entropy with probabilities clamped to [eps, 1 - eps]."""
    p = np.clip(np.asarray(probs, dtype=np.float64).ravel(), eps, 1.0 - eps)
    y = np.asarray(labels, dtype=np.float64).ravel()
    if p.size == 0:
        raise UndefinedMetricError("logloss needs at least one sample")
    return float(np.mean(-y * np.log(p) - (1.0 - y) * np.log1p(-p)))
