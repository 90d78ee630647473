"""Adam with decoupled weight decay for the Euclidean FM baseline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from lorentzfm.errors import ConfigError
from lorentzfm.models.base import FloatArray, InteractionModel, ParamGradient
from lorentzfm.models.fm import FactorizationMachine
from lorentzfm.optim.base import ModelOptimizer


class AdamShapeError(ConfigError):
    """Raised when parameters, gradients and moments disagree in shape."""

    pass


class AdamConfig(BaseModel):
    """Adam hyper-parameters.

    Attributes:
        learning_rate: Step size.
        beta1: First-moment decay.
        beta2: Second-moment decay.
        eps: Denominator stabilizer.
        weight_decay: Decoupled L2 coefficient lambda.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    learning_rate: float = Field(default=0.001, gt=0.0)
    beta1: float = Field(default=0.9, gt=0.0, lt=1.0)
    beta2: float = Field(default=0.999, gt=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    weight_decay: float = Field(default=1e-5, ge=0.0)


@dataclass
class AdamState:
    """Step counter and moment estimates, keyed like the parameters."""

    step: int = 0
    m: dict[str, FloatArray] = field(default_factory=dict)
    v: dict[str, FloatArray] = field(default_factory=dict)

    def to_arrays(self) -> dict[str, FloatArray]:
        arrays: dict[str, FloatArray] = {"step": np.array([float(self.step)])}
        for name, arr in self.m.items():
            arrays[f"m/{name}"] = arr
        for name, arr in self.v.items():
            arrays[f"v/{name}"] = arr
        return arrays

    @classmethod
    def from_arrays(cls, arrays: dict[str, FloatArray]) -> AdamState:
        state = cls(step=int(arrays["step"][0]) if "step" in arrays else 0)
        for key, arr in arrays.items():
            prefix, _, name = key.partition("/")
            if prefix == "m":
                state.m[name] = np.array(arr, copy=True)
            elif prefix == "v":
                state.v[name] = np.array(arr, copy=True)
        return state


def adam_step(
    params: dict[str, FloatArray],
    grads: dict[str, FloatArray],
    state: AdamState,
    cfg: AdamConfig,
) -> tuple[dict[str, FloatArray], AdamState]:
    """One bias-corrected Adam step with decoupled weight decay.

    Returns new parameter arrays and a new state; inputs are not mutated.

    Raises:
        AdamShapeError: If a gradient's shape differs from its parameter's.
    """
    t = state.step + 1
    new_params: dict[str, FloatArray] = {}
    new_state = AdamState(step=t)
    for name, theta in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(theta)
        if g.shape != theta.shape:
            raise AdamShapeError(f"gradient for {name!r} has shape {g.shape}, expected {theta.shape}")
        m_prev = state.m.get(name, np.zeros_like(theta))
        v_prev = state.v.get(name, np.zeros_like(theta))
        m = cfg.beta1 * m_prev + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * v_prev + (1.0 - cfg.beta2) * g * g
        m_hat = m / (1.0 - cfg.beta1**t)
        v_hat = v / (1.0 - cfg.beta2**t)
        update = m_hat / (np.sqrt(v_hat) + cfg.eps) + cfg.weight_decay * theta
        new_params[name] = theta - cfg.learning_rate * update
        new_state.m[name] = m
        new_state.v[name] = v
    return new_params, new_state


class Adam(ModelOptimizer):
    """Dense Adam over the FM baseline's bias, linear weights and factors."""

    def __init__(self, config: AdamConfig) -> None:
        self.config = config
        self.state = AdamState()

    def learning_rate(self, epoch: int) -> float:
        return self.config.learning_rate

    def apply(self, model: InteractionModel, grads: dict[str, ParamGradient], epoch: int) -> None:
        if not isinstance(model, FactorizationMachine):
            raise TypeError("Adam is configured for the FM baseline only")
        params = model.state_arrays()
        dense: dict[str, FloatArray] = {}
        for name, grad in grads.items():
            if grad.rows is None:
                dense[name] = grad.grad
            else:
                full = np.zeros_like(params[name])
                full[grad.rows] = grad.grad
                dense[name] = full
        updated, self.state = adam_step(params, dense, self.state, self.config)
        model.params.bias[...] = updated["bias"]
        model.params.linear[...] = updated["linear"]
        model.params.factors[...] = updated["factors"]

    def state_arrays(self) -> dict[str, FloatArray]:
        return self.state.to_arrays()

    def load_state_arrays(self, arrays: dict[str, FloatArray]) -> None:
        self.state = AdamState.from_arrays(arrays)
