"""Metrics reports and split evaluation."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from lorentzfm.data.bundle import DatasetBundle
from lorentzfm.data.schema import Task
from lorentzfm.evaluation.metrics import auc, hit_rate_at, logloss, mrr, ndcg
from lorentzfm.evaluation.ranking import rank_split
from lorentzfm.models.base import InteractionModel, sigmoid

logger = logging.getLogger(__name__)

_UNIT_INTERVAL = ("MRR", "NDCG", "AUC")


class MetricsReport(BaseModel):
    """Metrics of one model on one split.

    Attributes:
        task: ranking or ctr.
        split: Evaluated split.
        metrics: Metric name to value (``MRR``, ``HR@k``, ``NDCG`` or
            ``AUC``, ``logloss``).
        samples: Number of evaluated positives (ranking) or instances.
        mean_candidates: Mean candidate-pool size (ranking only).
        seed: Seed of the evaluated run.
        config_digest: Digest of the run configuration, if known.
    """

    model_config = ConfigDict(extra="forbid")

    task: Task
    split: str
    metrics: dict[str, float]
    samples: int = Field(..., ge=0)
    mean_candidates: float | None = None
    seed: int = 0
    config_digest: str = ""

    @model_validator(mode="after")
    def validate_codomain(self) -> MetricsReport:
        for name, value in self.metrics.items():
            if name in _UNIT_INTERVAL or name.startswith("HR@"):
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"{name}={value} outside [0, 1]")
            elif name == "logloss" and value < 0.0:
                raise ValueError(f"logloss={value} is negative")
        return self

    def to_text(self) -> str:
        """Plain-text report, one metric per line."""
        lines = [
            f"task: {self.task.value}",
            f"split: {self.split}",
            f"samples: {self.samples}",
        ]
        if self.mean_candidates is not None:
            lines.append(f"mean candidates: {self.mean_candidates:.1f}")
        lines.append(f"seed: {self.seed}")
        if self.config_digest:
            lines.append(f"config: {self.config_digest}")
        lines.append("")
        lines.extend(f"{name:<10}{value:.4f}" for name, value in self.metrics.items())
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str | Path) -> None:
        """Write ``metrics.json`` and ``metrics.txt`` into ``out_dir``."""
        root = Path(out_dir)
        root.mkdir(parents=True, exist_ok=True)
        payload = self.model_dump(mode="json")
        (root / "metrics.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        (root / "metrics.txt").write_text(self.to_text(), encoding="utf-8")
        logger.info("Metrics written to %s", root)


def evaluate_model(
    model: InteractionModel,
    bundle: DatasetBundle,
    split: str,
    hit_ks: tuple[int, ...] = (10,),
    exclude_validation_items: bool = True,
    sample: int | None = None,
    seed: int = 0,
    threads: int = 1,
    exclude_padding: bool = False,
    config_digest: str = "",
) -> MetricsReport:
    """Evaluate ``model`` on a split with the task's metrics.

    Ranking data gets MRR, HR@k for each ``hit_ks`` entry and NDCG over
    full candidate pools (or ``sample``-sized pools when given). CTR data
    gets AUC and logloss.
    """
    if bundle.task is Task.RANKING:
        results = rank_split(
            model,
            bundle,
            split,
            exclude_validation_items=exclude_validation_items,
            sample=sample,
            seed=seed,
            threads=threads,
            exclude_padding=exclude_padding,
        )
        metrics = {"MRR": mrr(results)}
        for k in hit_ks:
            metrics[f"HR@{k}"] = hit_rate_at(results, k)
        metrics["NDCG"] = ndcg(results)
        return MetricsReport(
            task=bundle.task,
            split=split,
            metrics=metrics,
            samples=len(results),
            mean_candidates=float(np.mean([r.candidates for r in results])),
            seed=seed,
            config_digest=config_digest,
        )

    batch = bundle.split(split)
    # AUC on raw scores: the sigmoid rounds large scores to exactly 1.0
    scores = model.scores(batch.indices, batch.effective_values(exclude_padding))
    probs = sigmoid(scores)
    return MetricsReport(
        task=bundle.task,
        split=split,
        metrics={"AUC": auc(scores, batch.labels), "logloss": logloss(probs, batch.labels)},
        samples=len(batch),
        seed=seed,
        config_digest=config_digest,
    )
