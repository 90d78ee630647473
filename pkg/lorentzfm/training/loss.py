"""Binary cross-entropy training objective."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from lorentzfm.evaluation.metrics import LOGLOSS_EPS


def bce_loss(probs: npt.ArrayLike, labels: npt.ArrayLike, eps: float = LOGLOSS_EPS) -> float:
    """Summed ``-y log p - (1 - y) log(1 - p)`` over a batch.

    Probabilities are clamped to [eps, 1 - eps]. The derivative with
    respect to each raw score is ``p - y``.
    """
    p = np.clip(np.asarray(probs, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(labels, dtype=np.float64)
    return float(np.sum(-y * np.log(p) - (1.0 - y) * np.log1p(-p)))
