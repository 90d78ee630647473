"""Base interaction-model interface.

Defines the contract shared by LorentzFM and the Euclidean FM baseline
so the training engine, evaluation and explain code never branch on the
concrete model.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar

import numpy as np
import numpy.typing as npt

from lorentzfm.errors import DataError

FloatArray = npt.NDArray[np.float64]
IndexArray = npt.NDArray[np.int64]


class ModelKind(str, Enum):
    """Model families that can be trained and checkpointed."""

    LORENTZ_FM = "lorentzfm"
    FM = "fm"


class FeatureLookupError(DataError):
    """Raised when a feature index falls outside the parameter table."""

    pass


@dataclass
class ParamGradient:
    """Gradient for one named parameter array.

    Attributes:
        grad: Gradient values; for sparse gradients one row per entry of
            ``rows``, otherwise the full parameter shape.
        rows: Feature indices the rows of ``grad`` belong to, or None for
            a dense gradient.
        counts: Batch slots summed into each row of a sparse gradient.
    """

    grad: FloatArray
    rows: IndexArray | None = None
    counts: IndexArray | None = None


def sigmoid(x: npt.ArrayLike) -> FloatArray:
    """Numerically stable logistic function."""
    z = np.asarray(x, dtype=np.float64)
    return np.asarray(np.exp(-np.logaddexp(0.0, -z)), dtype=np.float64)


def scatter_rows(indices: IndexArray, per_slot: FloatArray) -> ParamGradient:
    """Sum per-slot row gradients into one row per distinct feature.

    Args:
        indices: (N, m) feature indices.
        per_slot: (N, m, k) gradient for each slot.

    Returns:
        Sparse gradient with sorted distinct rows, (len(rows), k) sums and
        the number of slots behind each sum.
    """
    rows, inverse, counts = np.unique(indices, return_inverse=True, return_counts=True)
    grads = np.zeros((rows.shape[0], per_slot.shape[-1]), dtype=np.float64)
    np.add.at(grads, inverse.ravel(), per_slot.reshape(-1, per_slot.shape[-1]))
    return ParamGradient(grad=grads, rows=rows.astype(np.int64), counts=counts.astype(np.int64))


class InteractionModel(ABC):
    """Abstract base class for pairwise feature-interaction models.

    Implementations score aligned batches of sparse instances and return
    analytic gradients of the summed BCE loss given the per-instance
    derivative of the loss with respect to the score.
    """

    kind: ClassVar[ModelKind]

    @property
    @abstractmethod
    def count(self) -> int:
        """Number of features |V|."""
        ...

    @property
    @abstractmethod
    def dim(self) -> int:
        """Embedding size k (ambient dimension for LorentzFM)."""
        ...

    @abstractmethod
    def scores(self, indices: IndexArray, values: FloatArray) -> FloatArray:
        """Raw model scores for a batch.

        Args:
            indices: (N, m) feature indices.
            values: (N, m) feature values.

        Returns:
            (N,) real scores.
        """
        ...

    @abstractmethod
    def pairwise(self, indices: IndexArray, values: FloatArray) -> FloatArray:
        """Per-pair interaction contributions, shape (N, m, m).

        The diagonal is zero; off-diagonal entries sum to the interaction
        part of :meth:`scores`.
        """
        ...

    @abstractmethod
    def gradients(
        self, indices: IndexArray, values: FloatArray, coef: FloatArray
    ) -> dict[str, ParamGradient]:
        """Gradient of ``sum_b coef[b] * score[b]`` with respect to parameters.

        Passing ``coef = p - y`` yields the gradient of the summed BCE loss.
        """
        ...

    @abstractmethod
    def parameter_count(self) -> int:
        """Number of free trainable parameters."""
        ...

    @abstractmethod
    def state_arrays(self) -> dict[str, FloatArray]:
        """Parameter arrays for checkpointing, keyed by name."""
        ...

    def predict(self, indices: IndexArray, values: FloatArray) -> FloatArray:
        """Click/interaction probabilities ``sigmoid(scores)``."""
        return sigmoid(self.scores(indices, values))

    def check_indices(self, indices: IndexArray) -> None:
        """Raise FeatureLookupError when any index is out of range."""
        if indices.size and (indices.min() < 0 or indices.max() >= self.count):
            raise FeatureLookupError(
                f"feature index out of range [0, {self.count}): "
                f"min {int(indices.min())}, max {int(indices.max())}"
            )
