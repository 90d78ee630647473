"""Pairwise-interaction heatmap export.

The heatmap of an instance is the matrix of per-pair score contributions
between its slots: ``T(v_i, v_j) x_i x_j`` for LorentzFM and
``<v_i, v_j> x_i x_j`` for the FM baseline. The diagonal is masked. The
export is data (a delimited grid and a JSON document); plotting is left
to external tools.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from lorentzfm.data.bundle import DatasetBundle
from lorentzfm.data.instances import FeatureEntry, InstanceBatch, SparseInstance, pad_multivalued
from lorentzfm.errors import ConfigError
from lorentzfm.geometry import score_terms, triangle_defect
from lorentzfm.models.base import InteractionModel
from lorentzfm.models.fm import FactorizationMachine
from lorentzfm.models.lorentz_fm import LorentzFM

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@dataclass
class HeatmapExport:
    """Pairwise interaction matrix of one instance.

    Attributes:
        labels: ``field=token`` label of each slot.
        matrix: (d, d) symmetric pairwise contributions, zero diagonal.
        diagonal_masked: Diagonal entries carry no meaning and are masked.
        metadata: Model kind, score, probability, user/item and any
            unknown tokens met while resolving the instance.
        terms: Extra matrices by name when decomposition was requested:
            the interaction and linear parts of the LorentzFM score and
            the unnormalized triangle defect, each weighted by x_i x_j.
    """

    labels: list[str]
    matrix: FloatArray
    diagonal_masked: bool = True
    metadata: dict[str, Any] = field(default_factory=dict)
    terms: dict[str, FloatArray] = field(default_factory=dict)

    def grid(self, matrix: FloatArray | None = None) -> str:
        """Tab-separated grid with a label header row and column."""
        values = self.matrix if matrix is None else matrix
        lines = ["\t" + "\t".join(self.labels)]
        for i, label in enumerate(self.labels):
            cells = [
                "masked" if (self.diagonal_masked and i == j) else repr(float(values[i, j]))
                for j in range(len(self.labels))
            ]
            lines.append(label + "\t" + "\t".join(cells))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict[str, Any]:
        def _masked(values: FloatArray) -> list[list[float | None]]:
            return [
                [None if (self.diagonal_masked and i == j) else float(values[i, j]) for j in range(len(self.labels))]
                for i in range(len(self.labels))
            ]

        return {
            "labels": self.labels,
            "diagonal_masked": self.diagonal_masked,
            "matrix": _masked(self.matrix),
            "terms": {name: _masked(values) for name, values in self.terms.items()},
            "metadata": self.metadata,
        }

    def write(self, out_dir: str | Path, stem: str = "heatmap") -> list[Path]:
        """Write ``<stem>.tsv``, ``<stem>.json`` and one TSV per extra term."""
        root = Path(out_dir)
        root.mkdir(parents=True, exist_ok=True)
        written = [root / f"{stem}.tsv", root / f"{stem}.json"]
        written[0].write_text(self.grid(), encoding="utf-8")
        written[1].write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        for name, values in self.terms.items():
            path = root / f"{stem}.{name}.tsv"
            path.write_text(self.grid(values), encoding="utf-8")
            written.append(path)
        logger.info("Heatmap written to %s", root)
        return written


def parse_feature_spec(spec: str) -> dict[str, list[str]]:
    """Parse ``field=token,field=token|token`` into field -> tokens.

    Raises:
        ConfigError: On an entry without ``=``.
    """
    parsed: dict[str, list[str]] = {}
    for part in (p.strip() for p in spec.split(",")):
        if not part:
            continue
        name, sep, tokens = part.partition("=")
        if not sep or not name:
            raise ConfigError(f"feature entry {part!r} is not field=token")
        parsed.setdefault(name.strip(), []).extend(t for t in tokens.split("|") if t)
    return parsed


def resolve_features(
    bundle: DatasetBundle, features: dict[str, list[str]]
) -> tuple[InstanceBatch, list[str]]:
    """Build a one-row instance from raw tokens.

    Fields not mentioned get their unknown feature; tokens missing from
    the vocabulary also map to unknown and are returned as warnings.

    Raises:
        ConfigError: If a field is not part of the schema.
    """
    schema, vocab = bundle.schema, bundle.vocabulary
    unknown_fields = sorted(set(features) - set(schema.field_names))
    if unknown_fields:
        raise ConfigError(f"fields not in the dataset schema: {', '.join(unknown_fields)}")

    warnings: list[str] = []
    entries: list[FeatureEntry] = []
    for spec in schema.fields:
        encoded = []
        for token in features.get(spec.name, []):
            if not vocab.contains(spec.name, token):
                warnings.append(f"{spec.name}={token}")
            encoded.append(vocab.lookup(spec.name, token))
        slots, mask = pad_multivalued(encoded, spec.max_multiplicity, vocab.unknown_index[spec.name])
        entries.extend(
            FeatureEntry(field=spec.name, index=int(i), padded=p) for i, p in zip(slots, mask, strict=True)
        )
    for entry in warnings:
        logger.warning("Unknown token %s resolved to its field's unknown feature", entry)
    return InstanceBatch.from_instances([SparseInstance(entries=entries, label=1)]), warnings


def build_heatmap(
    model: InteractionModel,
    batch: InstanceBatch,
    bundle: DatasetBundle,
    decompose: bool = False,
    exclude_padding: bool = False,
    unknown_tokens: list[str] | None = None,
) -> HeatmapExport:
    """Pairwise contribution matrix of the first row of ``batch``."""
    values = batch.effective_values(exclude_padding)
    pairwise = model.pairwise(batch.indices[:1], values[:1])[0]
    if isinstance(model, FactorizationMachine):
        # pairwise() halves each ordered pair; the heatmap shows <v_i, v_j> x_i x_j
        pairwise = 2.0 * pairwise
    score = float(model.scores(batch.indices[:1], values[:1])[0])

    terms: dict[str, FloatArray] = {}
    if decompose:
        if isinstance(model, LorentzFM):
            emb = model.table.weights[batch.indices[0]]
            x = values[0]
            weights = np.outer(x, x) * (1.0 - np.eye(len(x)))
            interaction, linear = score_terms(emb[:, None, :], emb[None, :, :])
            terms["interaction"] = np.asarray(interaction) * weights
            terms["linear"] = np.asarray(linear) * weights
            terms["defect"] = np.asarray(triangle_defect(emb[:, None, :], emb[None, :, :])) * weights
        else:
            logger.warning("Score decomposition only applies to LorentzFM checkpoints")

    labels = [bundle.vocabulary.label(int(i)) for i in batch.indices[0]]
    metadata: dict[str, Any] = {
        "model": model.kind.value,
        "score": score,
        "probability": float(model.predict(batch.indices[:1], values[:1])[0]),
        "user": bundle.users.ids[int(batch.users[0])] if batch.users[0] >= 0 else None,
        "item": bundle.items.ids[int(batch.items[0])] if batch.items[0] >= 0 else None,
        "unknown_tokens": list(unknown_tokens or []),
    }
    return HeatmapExport(labels=labels, matrix=pairwise, metadata=metadata, terms=terms)
