"""Training configuration.

Config files are TOML (or JSON with a ``.json`` suffix); unknown keys
are rejected. Example::

    task = "ranking"
    model = "lorentzfm"
    embedding_size = 10
    batch_size = 256
    max_epochs = 100
    patience = 20
    negatives_per_positive = 10

    [rsgd]
    learning_rate = 0.1      # tuned over 0.05, 0.1, 0.2, 0.3
    burn_in_epochs = 25
    burn_in_factor = 0.1

Ranking runs usually use batch sizes from 64 to 512; CTR runs use 4096.
"""

from __future__ import annotations

import hashlib
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from lorentzfm.data.schema import Task, load_document
from lorentzfm.errors import ConfigError
from lorentzfm.models.base import ModelKind
from lorentzfm.optim.adam import AdamConfig
from lorentzfm.optim.rsgd import RsgdConfig


class Monitor(str, Enum):
    """Validation metric watched for early stopping."""

    MRR = "MRR"
    LOGLOSS = "logloss"

    @property
    def higher_is_better(self) -> bool:
        return self is Monitor.MRR


class TrainConfig(BaseModel):
    """Hyper-parameters of one training run.

    Attributes:
        task: ranking or ctr; must match the dataset.
        model: lorentzfm or the fm baseline.
        embedding_size: k; for LorentzFM the ambient dimension.
        batch_size: Instances per minibatch.
        max_epochs: Upper bound on epochs.
        patience: Epochs without monitor improvement before stopping.
        negatives_per_positive: Sampled negatives per training positive.
        seed: Seed of initialization, shuffling and sampling.
        monitor: Early-stopping metric; MRR for ranking, logloss for ctr.
        exclude_padding: Zero the value of padded slots.
        resample_negatives: Draw fresh negatives every epoch.
        asynchronous: Apply minibatch updates from a thread pool.
        val_candidate_sample: Candidates per validation positive, or None
            for full pools.
        exclude_validation_items: Drop validation items from test pools.
        hit_ks: Cut-offs reported as HR@k.
        rsgd: LorentzFM optimizer settings.
        adam: FM baseline optimizer settings.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    task: Task
    model: ModelKind = ModelKind.LORENTZ_FM
    embedding_size: int = Field(default=10, ge=1)
    batch_size: int = Field(default=256, ge=1)
    max_epochs: int = Field(default=100, ge=1)
    patience: int = Field(default=20, ge=1)
    negatives_per_positive: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0)
    monitor: Monitor | None = None
    exclude_padding: bool = False
    resample_negatives: bool = True
    asynchronous: bool = False
    val_candidate_sample: int | None = Field(default=500, ge=1)
    exclude_validation_items: bool = True
    hit_ks: list[int] = Field(default_factory=lambda: [10])
    rsgd: RsgdConfig = Field(default_factory=RsgdConfig)
    adam: AdamConfig = Field(default_factory=AdamConfig)

    @field_validator("hit_ks")
    @classmethod
    def validate_hit_ks(cls, v: list[int]) -> list[int]:
        if not v or any(k < 1 for k in v):
            raise ValueError("hit_ks must be a non-empty list of cut-offs >= 1")
        return sorted(set(v))

    @model_validator(mode="after")
    def validate_monitor(self) -> TrainConfig:
        """Ranking runs monitor MRR, CTR runs monitor logloss."""
        expected = Monitor.MRR if self.task is Task.RANKING else Monitor.LOGLOSS
        if self.monitor is not None and self.monitor is not expected:
            raise ValueError(f"{self.task.value} runs monitor {expected.value}, not {self.monitor.value}")
        if self.model is ModelKind.LORENTZ_FM and self.embedding_size < 2:
            raise ValueError("LorentzFM needs embedding_size >= 2")
        return self

    @property
    def resolved_monitor(self) -> Monitor:
        if self.monitor is not None:
            return self.monitor
        return Monitor.MRR if self.task is Task.RANKING else Monitor.LOGLOSS

    def digest(self) -> str:
        """Short SHA-256 of the canonical JSON form."""
        canonical = self.model_dump_json().encode("utf-8")
        return hashlib.sha256(canonical).hexdigest()[:12]


def load_train_config(path: str | Path) -> TrainConfig:
    """Load and validate a training config file.

    Raises:
        ConfigError: If the file is unreadable or fails validation.
    """
    data = load_document(path)
    try:
        return TrainConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid training config {path}: {exc}") from exc
