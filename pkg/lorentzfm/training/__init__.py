"""Training: configuration, loop, run history and synthetic data."""

from lorentzfm.training.config import Monitor, TrainConfig, load_train_config
from lorentzfm.training.engine import (
    DivergenceError,
    Trainer,
    TrainResult,
    build_optimizer,
    train,
    with_negatives,
)
from lorentzfm.training.history import EpochRecord, RunHistory
from lorentzfm.training.lifecycle import (
    VALID_TRANSITIONS,
    InvalidTransitionError,
    RunLifecycle,
    RunState,
)
from lorentzfm.training.loss import bce_loss
from lorentzfm.training.synthetic import SyntheticSpec, generate_synthetic, load_synthetic_spec

__all__ = [
    "VALID_TRANSITIONS",
    "DivergenceError",
    "EpochRecord",
    "InvalidTransitionError",
    "Monitor",
    "RunHistory",
    "RunLifecycle",
    "RunState",
    "SyntheticSpec",
    "TrainConfig",
    "TrainResult",
    "Trainer",
    "bce_loss",
    "build_optimizer",
    "generate_synthetic",
    "load_synthetic_spec",
    "load_train_config",
    "train",
    "with_negatives",
]
