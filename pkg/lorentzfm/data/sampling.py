"""Uniform negative sampling over each user's unobserved items."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Set

import numpy as np
import numpy.typing as npt

from lorentzfm.data.bundle import DatasetBundle
from lorentzfm.errors import DataError

logger = logging.getLogger(__name__)

# Below this unobserved share the explicit pool is cheaper than rejection.
_DENSE_POOL_SHARE = 0.5


class NegativeSamplingError(DataError):
    """Raised when a user has no unobserved item to sample."""

    pass


class NegativeSampler:
    """Draws items a user has not interacted with.

    Sampling is uniform and without replacement. When a user's pool is
    smaller than the request the draw falls back to sampling with
    replacement; each such case is logged and counted in ``shortfalls``.

    Attributes:
        n_items: Size of the item catalogue.
        observed: Items to exclude per user.
        shortfalls: Number of draws that needed replacement.
    """

    def __init__(self, n_items: int, observed: Mapping[int, Set[int]]) -> None:
        if n_items < 1:
            raise NegativeSamplingError("cannot sample negatives from an empty item catalogue")
        self.n_items = n_items
        self.observed = observed
        self.shortfalls = 0

    @classmethod
    def from_bundle(cls, bundle: DatasetBundle) -> NegativeSampler:
        return cls(bundle.n_items, bundle.observed)

    def pool(self, user: int) -> npt.NDArray[np.int64]:
        """Sorted unobserved item ids of ``user``."""
        seen = np.fromiter(self.observed.get(user, ()), dtype=np.int64)
        return np.setdiff1d(np.arange(self.n_items, dtype=np.int64), seen)

    def sample(self, user: int, count: int, rng: np.random.Generator) -> npt.NDArray[np.int64]:
        """``count`` unobserved item ids for ``user``.

        Raises:
            NegativeSamplingError: If the user has observed every item.
        """
        seen = self.observed.get(user, set())
        available = self.n_items - len(seen)
        if available <= 0:
            raise NegativeSamplingError(f"user {user} has no unobserved items")
        if available < count:
            self.shortfalls += 1
            logger.warning(
                "User %d has %d unobserved items, %d requested; sampling with replacement",
                user,
                available,
                count,
            )
            return rng.choice(self.pool(user), size=count, replace=True)
        if available < _DENSE_POOL_SHARE * self.n_items:
            return rng.choice(self.pool(user), size=count, replace=False)

        chosen: list[int] = []
        taken = set(seen)
        while len(chosen) < count:
            for draw in rng.integers(0, self.n_items, size=2 * (count - len(chosen)) + 4).tolist():
                if draw in taken:
                    continue
                taken.add(draw)
                chosen.append(draw)
                if len(chosen) == count:
                    break
        return np.array(chosen, dtype=np.int64)

    def sample_batch(
        self, users: npt.NDArray[np.int64], count: int, rng: np.random.Generator
    ) -> npt.NDArray[np.int64]:
        """(len(users), count) negatives, one row per user entry."""
        out = np.empty((len(users), count), dtype=np.int64)
        for row, user in enumerate(users.tolist()):
            out[row] = self.sample(user, count, rng)
        return out


def sample_negatives(
    user: int, count: int, bundle: DatasetBundle, rng: np.random.Generator
) -> npt.NDArray[np.int64]:
    """``count`` items uniformly drawn from ``user``'s unobserved items."""
    return NegativeSampler.from_bundle(bundle).sample(user, count, rng)
