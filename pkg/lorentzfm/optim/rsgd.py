"""Riemannian SGD on the hyperboloid.

An update multiplies the Euclidean gradient by the inverse Lorentz
metric (negating component 0), projects it onto the tangent space of the
current point, and moves along the geodesic with the exponential map.
The time coordinate is re-derived from the spatial part afterwards to
keep float drift off the manifold constraint. Within a minibatch, each
touched row takes one step with its gradient averaged over the slots
that hit it.

Embeddings are never weight-decayed; RsgdConfig has no such field.
"""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from lorentzfm.geometry import (
    FloatArray,
    LorentzPoint,
    NonFiniteError,
    TangentVector,
    check_on_manifold,
    exp_map,
    relift,
    tangent_project,
)
from lorentzfm.models.base import InteractionModel, ParamGradient
from lorentzfm.models.lorentz_fm import LorentzFM
from lorentzfm.optim.base import ModelOptimizer

logger = logging.getLogger(__name__)


class RsgdConfig(BaseModel):
    """Learning-rate settings for Riemannian SGD.

    Attributes:
        learning_rate: Step size eta after burn-in.
        burn_in_epochs: Number of initial epochs run at a reduced rate.
        burn_in_factor: Multiplier applied to eta during burn-in.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    learning_rate: float = Field(default=0.1, gt=0.0)
    burn_in_epochs: int = Field(default=25, ge=0)
    burn_in_factor: float = Field(default=0.1, gt=0.0, le=1.0)


def effective_lr(epoch: int, cfg: RsgdConfig) -> float:
    """Learning rate for a 0-based epoch, reduced during burn-in."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    if epoch < cfg.burn_in_epochs:
        return cfg.learning_rate * cfg.burn_in_factor
    return cfg.learning_rate


def riemannian_grad(x: npt.ArrayLike, g: npt.ArrayLike, check: bool = True) -> TangentVector:
    """Riemannian gradient at ``x`` from an ambient Euclidean gradient ``g``.

    Raises:
        ManifoldDomainError: If ``check`` is set and ``x`` is off the manifold.
    """
    point = np.asarray(x, dtype=np.float64)
    if check:
        check_on_manifold(point)
    h = np.array(g, dtype=np.float64, copy=True)
    h[..., 0] = -h[..., 0]
    return tangent_project(point, h)


def rsgd_step(
    x: npt.ArrayLike, g: npt.ArrayLike, lr: float, check: bool = True
) -> LorentzPoint:
    """One RSGD update ``exp_x(-lr * grad f(x))`` followed by a re-lift.

    Raises:
        NonFiniteError: If the gradient has NaN or infinite entries.
        ValueError: If ``lr`` is not positive.
    """
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    grad = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteError("non-finite gradient; step rejected")
    point = np.asarray(x, dtype=np.float64)
    tangent = -lr * riemannian_grad(point, grad, check=check)
    return relift(exp_map(point, tangent, check=False))


def row_average(grad: ParamGradient) -> FloatArray:
    """Mean gradient per touched row over the batch slots that hit it.

    The step of a row then depends on its own occurrences, not on the
    batch size. Gradients without counts are returned as they are.
    """
    if grad.counts is None:
        return grad.grad
    return grad.grad / np.maximum(grad.counts, 1)[:, None]


class RiemannianSGD(ModelOptimizer):
    """RSGD over the rows of a LorentzFM embedding table.

    Attributes:
        config: Learning-rate schedule.
        rejected_rows: Running count of row updates skipped because their
            gradient was not finite.
    """

    def __init__(self, config: RsgdConfig) -> None:
        self.config = config
        self.rejected_rows = 0

    def learning_rate(self, epoch: int) -> float:
        return effective_lr(epoch, self.config)

    def diagnostics(self) -> dict[str, int]:
        return {"rejected_rows": self.rejected_rows}

    def apply(self, model: InteractionModel, grads: dict[str, ParamGradient], epoch: int) -> None:
        if not isinstance(model, LorentzFM):
            raise TypeError("RiemannianSGD only updates LorentzFM embedding tables")
        grad = grads["embeddings"]
        assert grad.rows is not None
        self.update_rows(model.table.weights, grad.rows, row_average(grad), self.learning_rate(epoch))

    def update_rows(
        self, weights: FloatArray, rows: npt.NDArray[np.int64], grad: FloatArray, lr: float
    ) -> None:
        """Apply RSGD to ``weights[rows]`` in place, skipping non-finite rows."""
        finite = np.all(np.isfinite(grad), axis=1)
        bad = int((~finite).sum())
        if bad:
            self.rejected_rows += bad
            logger.warning("Rejected %d row updates with non-finite gradients", bad)
            rows, grad = rows[finite], grad[finite]
        if rows.size == 0:
            return
        weights[rows] = rsgd_step(weights[rows], grad, lr, check=False)
