"""k-core filtering of user-item interaction graphs."""

from __future__ import annotations

import logging

import pandas as pd

from lorentzfm.errors import ConfigError

logger = logging.getLogger(__name__)


def k_core_filter(
    pairs: pd.DataFrame,
    k_user: int,
    k_item: int,
    user_col: str = "user",
    item_col: str = "item",
) -> pd.DataFrame:
    """Keep the maximal subgraph where every user has >= ``k_user`` items
    and every item has >= ``k_item`` users.

    Duplicate ``(user, item)`` rows are dropped first (first occurrence
    wins). Each round removes every edge touching an under-degree node;
    degrees only shrink, so the fixpoint is the unique k-core whatever
    the removal order. Extra columns ride along untouched.

    Raises:
        ConfigError: If either threshold is below 1.
    """
    if k_user < 1 or k_item < 1:
        raise ConfigError(f"k-core thresholds must be >= 1, got k_user={k_user}, k_item={k_item}")

    frame = pairs.drop_duplicates(subset=[user_col, item_col], keep="first")
    start = len(frame)
    rounds = 0
    while len(frame):
        user_degree = frame.groupby(user_col, sort=False)[item_col].transform("size")
        item_degree = frame.groupby(item_col, sort=False)[user_col].transform("size")
        keep = (user_degree >= k_user) & (item_degree >= k_item)
        if bool(keep.all()):
            break
        frame = frame[keep]
        rounds += 1

    logger.info(
        "k-core (%d, %d): %d -> %d interactions in %d rounds",
        k_user,
        k_item,
        start,
        len(frame),
        rounds,
    )
    return frame.reset_index(drop=True)
