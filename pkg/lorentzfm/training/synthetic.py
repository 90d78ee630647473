"""Synthetic CTR data with a planted pairwise structure.

Every token of every field is given a ground-truth point on the
hyperboloid, drawn around a centre shared by all tokens. An instance
draws one token per field uniformly; its true score is ``signal`` times
the centred sum of triangle scores over all ordered field pairs, and its
label is drawn from the sigmoid of that score. With the default centre
most of the score variance is carried by per-token effects, which the
FM baseline can represent too. Since the truth is known, the generator
reports the Bayes AUC (the AUC of the true scores) as the ceiling a
model can reach.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import numpy.typing as npt
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from lorentzfm.data.bundle import DatasetBundle
from lorentzfm.data.pipeline import PreprocessOptions, build_bundle
from lorentzfm.data.schema import DatasetSchema, FieldSide, FieldSpec, Task, load_document
from lorentzfm.data.splits import make_splits
from lorentzfm.errors import ConfigError
from lorentzfm.evaluation.metrics import auc
from lorentzfm.geometry import lift, triangle_score
from lorentzfm.models.base import sigmoid

logger = logging.getLogger(__name__)

_CHUNK = 4096


class SyntheticSpec(BaseModel):
    """Shape and difficulty of a synthetic dataset.

    Attributes:
        n_fields: Number of categorical fields.
        cardinality: Distinct tokens per field.
        n_instances: Number of generated instances.
        dim: Ambient dimension of the ground-truth points.
        radius: Standard deviation of their spatial coordinates.
        center: Offset of the shared centre along the first spatial axis.
        signal: Scale of the true score; 0 makes labels pure noise.
        val_fraction: Share of instances held out for validation.
        test_fraction: Share of instances held out for testing.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    n_fields: int = Field(default=12, ge=2)
    cardinality: int = Field(default=166, ge=1)
    n_instances: int = Field(default=50_000, ge=10)
    dim: int = Field(default=4, ge=2)
    radius: float = Field(default=1.0, gt=0.0)
    center: float = Field(default=1.0, ge=0.0)
    signal: float = Field(default=1.0, ge=0.0)
    val_fraction: float = Field(default=0.1, gt=0.0, lt=0.5)
    test_fraction: float = Field(default=0.1, gt=0.0, lt=0.5)


def load_synthetic_spec(path: str | Path) -> SyntheticSpec:
    """Load a synthetic spec file (TOML or JSON)."""
    try:
        return SyntheticSpec.model_validate(load_document(path))
    except ValueError as exc:
        raise ConfigError(f"invalid synthetic spec {path}: {exc}") from exc


def _true_scores(points: npt.NDArray[np.float64], tokens: npt.NDArray[np.int64]) -> npt.NDArray[np.float64]:
    """Sum of triangle scores over ordered field pairs of every row."""
    n_fields = tokens.shape[1]
    off_diagonal = 1.0 - np.eye(n_fields)
    field_ids = np.arange(n_fields)
    scores = np.empty(tokens.shape[0])
    for start in range(0, tokens.shape[0], _CHUNK):
        emb = points[field_ids, tokens[start : start + _CHUNK]]
        pair = np.asarray(triangle_score(emb[:, :, None, :], emb[:, None, :, :], check=False))
        scores[start : start + _CHUNK] = (pair * off_diagonal).sum(axis=(1, 2))
    return scores


def _bayes_auc(logits: npt.NDArray[np.float64], labels: npt.NDArray[np.float64]) -> float | None:
    if labels.min() == labels.max():
        return None
    return auc(logits, labels)


def generate_synthetic(spec: SyntheticSpec, seed: int) -> DatasetBundle:
    """Generate a CTR dataset bundle; identical for identical seeds.

    The bundle's ``meta`` carries the generator settings and the Bayes AUC over all
    instances and over the validation and test splits.
    """
    rng = np.random.default_rng(seed)
    spatial = rng.normal(0.0, spec.radius, size=(spec.n_fields, spec.cardinality, spec.dim - 1))
    spatial[..., 0] += spec.center
    points = lift(spatial)
    tokens = rng.integers(0, spec.cardinality, size=(spec.n_instances, spec.n_fields))

    raw = _true_scores(points, tokens)
    logits = spec.signal * (raw - raw.mean())
    labels = (rng.random(spec.n_instances) < sigmoid(logits)).astype(np.float64)

    names = [f"f{j}" for j in range(spec.n_fields)]
    frame = pd.DataFrame({name: [f"t{t}" for t in tokens[:, j]] for j, name in enumerate(names)})
    frame["label"] = labels.astype(np.int64)

    half = spec.n_fields // 2
    schema = DatasetSchema(
        task=Task.CTR,
        fields=[
            FieldSpec(name=name, side=FieldSide.USER if j < half else FieldSide.ITEM)
            for j, name in enumerate(names)
        ],
        label_column="label",
        val_size=spec.val_fraction,
        test_size=spec.test_fraction,
    )
    splits = make_splits(spec.n_instances, spec.val_fraction, spec.test_fraction, seed)
    meta = {
        "synthetic": spec.model_dump(),
        "bayes_auc": _bayes_auc(logits, labels),
        "bayes_auc_val": _bayes_auc(logits[splits.val], labels[splits.val]),
        "bayes_auc_test": _bayes_auc(logits[splits.test], labels[splits.test]),
        "positive_rate": float(labels.mean()),
    }
    logger.info(
        "Synthetic data: %d instances, %d fields, positive rate %.3f, Bayes AUC %s",
        spec.n_instances,
        spec.n_fields,
        meta["positive_rate"],
        meta["bayes_auc"],
    )
    return build_bundle(frame, schema, PreprocessOptions(min_freq=0), seed, extra_meta=meta)
