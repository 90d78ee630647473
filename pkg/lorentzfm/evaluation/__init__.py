"""Evaluation: ranking metrics over candidate pools and CTR metrics."""

from lorentzfm.evaluation.metrics import (
    LOGLOSS_EPS,
    UndefinedMetricError,
    auc,
    hit_rate_at,
    logloss,
    mrr,
    ndcg,
)
from lorentzfm.evaluation.ranking import (
    EmptyCandidatePoolError,
    RankingResult,
    candidate_items,
    rank_candidates,
    rank_from_scores,
    rank_split,
)
from lorentzfm.evaluation.report import MetricsReport, evaluate_model

__all__ = [
    "LOGLOSS_EPS",
    "EmptyCandidatePoolError",
    "MetricsReport",
    "RankingResult",
    "UndefinedMetricError",
    "auc",
    "candidate_items",
    "evaluate_model",
    "hit_rate_at",
    "logloss",
    "mrr",
    "ndcg",
    "rank_candidates",
    "rank_from_scores",
    "rank_split",
]
