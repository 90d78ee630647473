"""Interaction models: LorentzFM and the Euclidean FM baseline."""

from lorentzfm.models.base import (
    FeatureLookupError,
    InteractionModel,
    ModelKind,
    ParamGradient,
    sigmoid,
)
from lorentzfm.models.checkpoint import (
    Checkpoint,
    CheckpointFormatError,
    load_checkpoint,
    save_checkpoint,
)
from lorentzfm.models.fm import FactorizationMachine, FmParameters, fm_forward, fm_grad
from lorentzfm.models.lorentz_fm import (
    EmbeddingTable,
    LorentzFM,
    init_lorentz_table,
    lfm_forward,
    lfm_grad,
    lfm_predict,
)


def build_model(kind: ModelKind, count: int, dim: int, seed: int) -> InteractionModel:
    """Initialize a fresh model of the requested family."""
    if kind is ModelKind.LORENTZ_FM:
        return LorentzFM.initialize(count, dim, seed)
    return FactorizationMachine.initialize(count, dim, seed)


__all__ = [
    "Checkpoint",
    "CheckpointFormatError",
    "EmbeddingTable",
    "FactorizationMachine",
    "FeatureLookupError",
    "FmParameters",
    "InteractionModel",
    "LorentzFM",
    "ModelKind",
    "ParamGradient",
    "build_model",
    "fm_forward",
    "fm_grad",
    "init_lorentz_table",
    "lfm_forward",
    "lfm_grad",
    "lfm_predict",
    "load_checkpoint",
    "save_checkpoint",
    "sigmoid",
]
