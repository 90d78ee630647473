"""LorentzFM: triangle pooling over hyperboloid embeddings.

The score of an instance is the sum over ordered slot pairs ``i != j``
of ``T(v_i, v_j) * x_i * x_j``, where ``T`` is the normalized Lorentz
triangle defect. There is no bias or linear weight; the linear term
reappears inside ``T``. Gradients treat all ambient coordinates as
independent; the optimizer owns the manifold constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from lorentzfm.data.instances import SparseInstance
from lorentzfm.errors import ConfigError
from lorentzfm.geometry import lift, manifold_residual
from lorentzfm.models.base import (
    FloatArray,
    IndexArray,
    InteractionModel,
    ModelKind,
    ParamGradient,
    scatter_rows,
    sigmoid,
)


INIT_RANGE = 0.01


@dataclass
class EmbeddingTable:
    """Feature-index to hyperboloid-point lookup table.

    Attributes:
        weights: (|V|, k) matrix, each row a point on the hyperboloid.
    """

    weights: FloatArray

    @property
    def count(self) -> int:
        return int(self.weights.shape[0])

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])

    @property
    def free_parameter_count(self) -> int:
        """``(k - 1) * |V|``; the time coordinate is not free."""
        return (self.dim - 1) * self.count

    def max_residual(self) -> float:
        """Largest ``|<x, x>_L + 1|`` over all rows."""
        if self.count == 0:
            return 0.0
        return float(np.max(manifold_residual(self.weights)))


def init_lorentz_table(count: int, dim: int, seed: int) -> EmbeddingTable:
    """Create a table with spatial coordinates drawn from U[-0.01, 0.01].

    Args:
        count: Number of features |V|.
        dim: Ambient dimension k (spatial dimension k - 1).
        seed: Seed for the generator.

    Raises:
        ConfigError: If ``dim < 2`` or ``count < 1``.
    """
    if dim < 2:
        raise ConfigError(f"LorentzFM embedding size must be >= 2, got {dim}")
    if count < 1:
        raise ConfigError(f"feature count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    spatial = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(count, dim - 1))
    return EmbeddingTable(weights=lift(spatial))


def _pair_weights(values: FloatArray) -> FloatArray:
    """``x_i x_j`` for every ordered pair with the diagonal zeroed."""
    width = values.shape[1]
    off_diagonal = 1.0 - np.eye(width)
    return values[:, :, None] * values[:, None, :] * off_diagonal


def _triangle_matrix(emb: FloatArray) -> FloatArray:
    """(N, m, m) triangle scores between all slot embeddings."""
    t = emb[..., 0]
    inner = np.einsum("bik,bjk->bij", emb[..., 1:], emb[..., 1:]) - t[:, :, None] * t[:, None, :]
    denom = t[:, :, None] * t[:, None, :]
    return (1.0 - inner - t[:, :, None] - t[:, None, :]) / denom


class LorentzFM(InteractionModel):
    """Lorentzian factorization machine.

    Attributes:
        table: The embedding table, the model's only trainable state.
    """

    kind: ClassVar[ModelKind] = ModelKind.LORENTZ_FM

    def __init__(self, table: EmbeddingTable) -> None:
        self.table = table

    @classmethod
    def initialize(cls, count: int, dim: int, seed: int) -> LorentzFM:
        """Build a model with a freshly initialized table."""
        return cls(init_lorentz_table(count, dim, seed))

    @property
    def count(self) -> int:
        return self.table.count

    @property
    def dim(self) -> int:
        return self.table.dim

    def scores(self, indices: IndexArray, values: FloatArray) -> FloatArray:
        return np.asarray(self.pairwise(indices, values).sum(axis=(1, 2)), dtype=np.float64)

    def pairwise(self, indices: IndexArray, values: FloatArray) -> FloatArray:
        self.check_indices(indices)
        emb = self.table.weights[indices]
        return _triangle_matrix(emb) * _pair_weights(values)

    def gradients(
        self, indices: IndexArray, values: FloatArray, coef: FloatArray
    ) -> dict[str, ParamGradient]:
        self.check_indices(indices)
        emb = self.table.weights[indices]
        t = emb[..., 0]
        w = _pair_weights(values)
        tri = _triangle_matrix(emb)

        # a[b, i, j] = x_i x_j / (t_i t_j)
        a = w / (t[:, :, None] * t[:, None, :])
        per_slot = np.empty_like(emb)
        per_slot[..., 1:] = -2.0 * np.einsum("bij,bjk->bik", a, emb[..., 1:])
        per_slot[..., 0] = 2.0 * (
            np.einsum("bij,bj->bi", a, t - 1.0) - (w * tri).sum(axis=2) / t
        )
        per_slot *= np.asarray(coef, dtype=np.float64)[:, None, None]

        return {"embeddings": scatter_rows(indices, per_slot)}

    def parameter_count(self) -> int:
        return self.table.free_parameter_count

    def state_arrays(self) -> dict[str, FloatArray]:
        return {"embeddings": self.table.weights}

    @classmethod
    def from_state_arrays(cls, arrays: dict[str, FloatArray]) -> LorentzFM:
        return cls(EmbeddingTable(weights=np.asarray(arrays["embeddings"], dtype=np.float64)))


def lfm_forward(inst: SparseInstance, table: EmbeddingTable) -> float:
    """Score one instance over ordered pairs (twice the unordered sum)."""
    model = LorentzFM(table)
    return float(model.scores(inst.indices[None, :], inst.values[None, :])[0])


def lfm_predict(inst: SparseInstance, table: EmbeddingTable) -> float:
    """Probability ``sigmoid(lfm_forward(inst, table))``."""
    return float(sigmoid(lfm_forward(inst, table)))


def lfm_grad(inst: SparseInstance, table: EmbeddingTable) -> dict[int, FloatArray]:
    """Ambient BCE-loss gradient for every feature present in ``inst``.

    Uses the residual ``p - y``; repeated features accumulate the
    contributions of all their slots.
    """
    model = LorentzFM(table)
    indices, values = inst.indices[None, :], inst.values[None, :]
    residual = model.predict(indices, values) - float(inst.label)
    grad = model.gradients(indices, values, residual)["embeddings"]
    assert grad.rows is not None
    return {int(r): grad.grad[n] for n, r in enumerate(grad.rows)}
