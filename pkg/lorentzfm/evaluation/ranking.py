"""Full-candidate ranking of held-out positives.

Each held-out ``(user, item)`` positive is scored against every item the
user has not been observed with, and its mean-tie rank among those
candidates is recorded.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Set
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from lorentzfm.data.bundle import DatasetBundle
from lorentzfm.data.instances import InstanceBatch
from lorentzfm.errors import DataError
from lorentzfm.models.base import InteractionModel

logger = logging.getLogger(__name__)


class EmptyCandidatePoolError(DataError):
    """Raised when a positive has no other candidate to be ranked against."""

    pass


@dataclass(frozen=True)
class RankingResult:
    """Rank of one held-out positive.

    Attributes:
        rank: 1-based mean-tie rank, ``1 <= rank <= candidates``.
        candidates: Number of scored candidates, positive included.
        user: User id of the positive.
        item: Item id of the positive.
    """

    rank: float
    candidates: int
    user: int = -1
    item: int = -1


def rank_from_scores(positive: float, others: npt.ArrayLike) -> float:
    """Mean-tie rank of ``positive`` among itself and ``others``.

    ``1 + #higher + #tied / 2``: a tie with one other at the top ranks 1.5.
    """
    o = np.asarray(others, dtype=np.float64)
    higher = int(np.count_nonzero(o > positive))
    tied = int(np.count_nonzero(o == positive))
    return 1.0 + higher + 0.5 * tied


def candidate_items(
    n_items: int,
    positive: int,
    exclude: Set[int],
    sample: int | None = None,
    rng: np.random.Generator | None = None,
) -> npt.NDArray[np.int64]:
    """Candidate item ids with the positive first.

    The pool is every item outside ``exclude``; the positive itself is
    never excluded. With ``sample`` set, at most that many other items
    are kept, drawn without replacement.

    Raises:
        EmptyCandidatePoolError: If no item besides the positive remains.
    """
    mask = np.ones(n_items, dtype=bool)
    if exclude:
        mask[np.fromiter(exclude, dtype=np.int64)] = False
    mask[positive] = False
    others = np.flatnonzero(mask).astype(np.int64)
    if others.size == 0:
        raise EmptyCandidatePoolError(f"item {positive} has no candidates to rank against")
    if sample is not None and others.size > sample:
        generator = rng if rng is not None else np.random.default_rng(0)
        others = np.sort(generator.choice(others, size=sample, replace=False))
    return np.concatenate([np.array([positive], dtype=np.int64), others])


def rank_candidates(
    model: InteractionModel,
    instance: InstanceBatch,
    bundle: DatasetBundle,
    exclude: Set[int],
    sample: int | None = None,
    rng: np.random.Generator | None = None,
    exclude_padding: bool = False,
) -> RankingResult:
    """Rank a one-row positive instance against its unobserved items."""
    user, positive = int(instance.users[0]), int(instance.items[0])
    items = candidate_items(bundle.n_items, positive, exclude, sample, rng)
    candidates = bundle.with_items(instance.take(np.zeros(len(items), dtype=np.int64)), items)
    scores = model.scores(candidates.indices, candidates.effective_values(exclude_padding))
    return RankingResult(
        rank=rank_from_scores(float(scores[0]), scores[1:]),
        candidates=len(items),
        user=user,
        item=positive,
    )


def rank_split(
    model: InteractionModel,
    bundle: DatasetBundle,
    split: str,
    exclude_validation_items: bool = True,
    sample: int | None = None,
    seed: int = 0,
    threads: int = 1,
    exclude_padding: bool = False,
) -> list[RankingResult]:
    """Rank every positive of ``split``.

    Training items are always excluded from a user's pool; validation
    items too when ranking the test split with
    ``exclude_validation_items``. Subsampled pools draw from a generator
    seeded by ``(seed, row)``, so results do not depend on ``threads``.
    """
    batch = bundle.split(split)
    excluded_splits = ["train"]
    if split == "test" and exclude_validation_items:
        excluded_splits.append("val")
    observed: Mapping[int, Set[int]] = bundle.observed_in(excluded_splits)
    rows = np.flatnonzero(batch.labels > 0)

    def _rank(row: int) -> RankingResult:
        rng = np.random.default_rng([seed, row]) if sample is not None else None
        return rank_candidates(
            model,
            batch.take([row]),
            bundle,
            observed.get(int(batch.users[row]), set()),
            sample=sample,
            rng=rng,
            exclude_padding=exclude_padding,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_rank, rows.tolist()))
    else:
        results = [_rank(row) for row in rows.tolist()]
    logger.info("Ranked %d %s positives (sample=%s)", len(results), split, sample)
    return results
