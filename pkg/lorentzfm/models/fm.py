"""Euclidean factorization machine baseline.

``score = w0 + sum_i w_i x_i + sum_{i<j} <v_i, v_j> x_i x_j`` with the
pairwise part evaluated by the usual square-of-sum identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from lorentzfm.data.instances import SparseInstance
from lorentzfm.errors import ConfigError
from lorentzfm.models.base import (
    FloatArray,
    IndexArray,
    InteractionModel,
    ModelKind,
    ParamGradient,
    scatter_rows,
)

FM_INIT_STD = 0.01


@dataclass
class FmParameters:
    """Trainable state of the FM baseline.

    Attributes:
        bias: Global bias w0, stored as a length-1 array.
        linear: (|V|,) first-order weights.
        factors: (|V|, k) latent factors.
    """

    bias: FloatArray
    linear: FloatArray
    factors: FloatArray

    def __post_init__(self) -> None:
        self.bias = np.asarray(self.bias, dtype=np.float64).reshape(1)
        self.linear = np.asarray(self.linear, dtype=np.float64)
        self.factors = np.asarray(self.factors, dtype=np.float64)
        if self.factors.ndim != 2 or self.linear.shape != (self.factors.shape[0],):
            raise ConfigError(
                f"inconsistent FM shapes: linear {self.linear.shape}, factors {self.factors.shape}"
            )

    @classmethod
    def initialize(cls, count: int, dim: int, seed: int) -> FmParameters:
        """Zero bias and linear weights, N(0, 0.01^2) factors."""
        if dim < 1 or count < 1:
            raise ConfigError(f"FM needs count >= 1 and dim >= 1, got {count}, {dim}")
        rng = np.random.default_rng(seed)
        return cls(
            bias=np.zeros(1),
            linear=np.zeros(count),
            factors=rng.normal(0.0, FM_INIT_STD, size=(count, dim)),
        )


class FactorizationMachine(InteractionModel):
    """Second-order FM with a first-order term and bias."""

    kind: ClassVar[ModelKind] = ModelKind.FM

    def __init__(self, params: FmParameters) -> None:
        self.params = params

    @classmethod
    def initialize(cls, count: int, dim: int, seed: int) -> FactorizationMachine:
        return cls(FmParameters.initialize(count, dim, seed))

    @property
    def count(self) -> int:
        return int(self.params.factors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.params.factors.shape[1])

    def scores(self, indices: IndexArray, values: FloatArray) -> FloatArray:
        self.check_indices(indices)
        p = self.params
        first = (p.linear[indices] * values).sum(axis=1)
        xv = p.factors[indices] * values[:, :, None]
        summed = xv.sum(axis=1)
        second = 0.5 * ((summed**2).sum(axis=1) - (xv**2).sum(axis=(1, 2)))
        return np.asarray(p.bias[0] + first + second, dtype=np.float64)

    def pairwise(self, indices: IndexArray, values: FloatArray) -> FloatArray:
        """Half inner-product contributions per ordered pair.

        Halving keeps the matrix summing to the pairwise part of the score;
        explain exports double it back to ``<v_i, v_j> x_i x_j``.
        """
        self.check_indices(indices)
        xv = self.params.factors[indices] * values[:, :, None]
        gram = np.einsum("bik,bjk->bij", xv, xv)
        width = indices.shape[1]
        return 0.5 * gram * (1.0 - np.eye(width))

    def gradients(
        self, indices: IndexArray, values: FloatArray, coef: FloatArray
    ) -> dict[str, ParamGradient]:
        self.check_indices(indices)
        c = np.asarray(coef, dtype=np.float64)
        vf = self.params.factors[indices]
        xv = vf * values[:, :, None]
        summed = xv.sum(axis=1, keepdims=True)
        factor_slot = values[:, :, None] * (summed - xv) * c[:, None, None]
        linear_slot = (values * c[:, None])[:, :, None]

        linear = scatter_rows(indices, linear_slot)
        linear.grad = linear.grad[:, 0]
        return {
            "bias": ParamGradient(grad=np.array([c.sum()])),
            "linear": linear,
            "factors": scatter_rows(indices, factor_slot),
        }

    def parameter_count(self) -> int:
        """``1 + |V| + k * |V|``."""
        return 1 + self.count + self.dim * self.count

    def state_arrays(self) -> dict[str, FloatArray]:
        return {
            "bias": self.params.bias,
            "linear": self.params.linear,
            "factors": self.params.factors,
        }

    @classmethod
    def from_state_arrays(cls, arrays: dict[str, FloatArray]) -> FactorizationMachine:
        return cls(
            FmParameters(bias=arrays["bias"], linear=arrays["linear"], factors=arrays["factors"])
        )


def fm_forward(inst: SparseInstance, params: FmParameters) -> float:
    """Score one instance with the FM baseline."""
    model = FactorizationMachine(params)
    return float(model.scores(inst.indices[None, :], inst.values[None, :])[0])


def fm_grad(inst: SparseInstance, params: FmParameters) -> FmParameters:
    """Dense BCE-loss gradients for bias, linear weights and factors.

    Features absent from ``inst`` get exactly zero gradient.
    """
    model = FactorizationMachine(params)
    indices, values = inst.indices[None, :], inst.values[None, :]
    residual = model.predict(indices, values) - float(inst.label)
    grads = model.gradients(indices, values, residual)

    linear = np.zeros_like(params.linear)
    factors = np.zeros_like(params.factors)
    assert grads["linear"].rows is not None and grads["factors"].rows is not None
    linear[grads["linear"].rows] = grads["linear"].grad
    factors[grads["factors"].rows] = grads["factors"].grad
    return FmParameters(bias=grads["bias"].grad, linear=linear, factors=factors)
