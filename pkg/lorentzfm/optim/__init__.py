"""Parameter-update rules: Riemannian SGD and Adam."""

from lorentzfm.optim.adam import Adam, AdamConfig, AdamShapeError, AdamState, adam_step
from lorentzfm.optim.base import ModelOptimizer
from lorentzfm.optim.rsgd import (
    RiemannianSGD,
    RsgdConfig,
    effective_lr,
    riemannian_grad,
    rsgd_step,
)

__all__ = [
    "Adam",
    "AdamConfig",
    "AdamShapeError",
    "AdamState",
    "ModelOptimizer",
    "RiemannianSGD",
    "RsgdConfig",
    "adam_step",
    "effective_lr",
    "riemannian_grad",
    "rsgd_step",
]
