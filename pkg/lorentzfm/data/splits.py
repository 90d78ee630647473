"""Random train/validation/test splits.

Sizes are either absolute counts (ranking: 10K validation and 10K test
positives) or fractions of the row count (CTR: 80/10/10). Fractions are
floored; training takes whatever remains.
"""

from __future__ import annotations

import math
from collections.abc import Sized
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from lorentzfm.errors import ConfigError

SplitSize = int | float


class SplitSizeError(ConfigError):
    """Raised when requested split sizes are invalid or exceed the data."""

    pass


@dataclass(frozen=True)
class Splits:
    """Sorted, disjoint row positions of each split."""

    train: npt.NDArray[np.int64]
    val: npt.NDArray[np.int64]
    test: npt.NDArray[np.int64]

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.val), len(self.test)


def resolve_size(size: SplitSize, total: int) -> int:
    """Turn a count or a fraction in [0, 1) into a row count."""
    if isinstance(size, bool):
        raise SplitSizeError(f"invalid split size {size!r}")
    if isinstance(size, int):
        if size < 0:
            raise SplitSizeError(f"split size must be >= 0, got {size}")
        return size
    if not 0.0 <= size < 1.0:
        raise SplitSizeError(f"fractional split size must be in [0, 1), got {size}")
    return math.floor(size * total + 1e-9)


def make_splits(
    rows: int | Sized, val_size: SplitSize, test_size: SplitSize, seed: int
) -> Splits:
    """Uniformly random disjoint splits, identical for identical seeds.

    Args:
        rows: Number of rows, or the sequence of rows to split.
        val_size: Validation count or fraction.
        test_size: Test count or fraction.
        seed: Seed of the permutation.

    Raises:
        SplitSizeError: If the sizes are invalid or leave no training rows.
    """
    total = rows if isinstance(rows, int) else len(rows)
    n_val = resolve_size(val_size, total)
    n_test = resolve_size(test_size, total)
    if n_val + n_test >= total:
        raise SplitSizeError(
            f"validation ({n_val}) + test ({n_test}) leave no training rows out of {total}"
        )

    perm = np.random.default_rng(seed).permutation(total).astype(np.int64)
    return Splits(
        train=np.sort(perm[n_val + n_test :]),
        val=np.sort(perm[:n_val]),
        test=np.sort(perm[n_val : n_val + n_test]),
    )
