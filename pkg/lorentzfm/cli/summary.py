"""Text summaries of checkpoints, processed datasets and run directories."""

from __future__ import annotations

import json
from pathlib import Path

from lorentzfm.data.bundle import DatasetStats
from lorentzfm.errors import DataError
from lorentzfm.models.checkpoint import Checkpoint, load_checkpoint
from lorentzfm.models.lorentz_fm import LorentzFM
from lorentzfm.training.history import RunHistory
from lorentzfm.training.lifecycle import RunLifecycle, RunState


def describe_checkpoint(ckpt: Checkpoint) -> list[str]:
    """Model family, sizes, free-parameter count and manifold residual."""
    model = ckpt.to_model()
    lines = [
        f"model: {ckpt.kind.value}",
        f"features (|V|): {ckpt.count}",
        f"embedding size (k): {ckpt.dim}",
        f"free parameters: {model.parameter_count()}",
        f"seed: {ckpt.seed}",
    ]
    if isinstance(model, LorentzFM):
        lines.append(f"max manifold residual: {model.table.max_residual():.3e}")
    for key in ("epoch", "monitor", "monitor_value"):
        if key in ckpt.metadata:
            lines.append(f"{key}: {ckpt.metadata[key]}")
    return lines


def describe_dataset(data_dir: Path) -> list[str]:
    try:
        stats = DatasetStats.model_validate_json((data_dir / "stats.json").read_text(encoding="utf-8"))
        meta = json.loads((data_dir / "meta.json").read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read dataset summary in {data_dir}: {exc}") from exc
    lines = [f"dataset: {data_dir}", f"task: {meta.get('task', '?')}", stats.to_text()]
    if meta.get("bayes_auc") is not None:
        lines.append(f"bayes AUC: {meta['bayes_auc']:.4f}")
    return lines


def describe_run(run_dir: Path) -> list[str]:
    history = RunHistory.load(run_dir)
    lines = [
        f"run: {run_dir}",
        f"epochs: {len(history)}",
        f"final state: {history.summary.get('final_state', '?')}",
        f"seconds per epoch: {history.mean_seconds():.3f}",
    ]
    if "current_state" in history.summary:
        lifecycle = RunLifecycle.from_dict(history.summary)
        steps = [RunState.INIT.value]
        steps.extend(f"{to.value} (epoch {epoch})" for _, to, epoch in lifecycle.history)
        lines.append("phases: " + " -> ".join(steps))
        if not lifecycle.is_terminal():
            lines.append(f"warning: run stopped in non-terminal phase {lifecycle.current_state.value}")
    for name, count in history.summary.get("diagnostics", {}).items():
        lines.append(f"{name.replace('_', ' ')}: {count}")
    if history.records:
        monitor = history.records[0].monitor
        best = history.best(higher_is_better=monitor == "MRR")
        if best is not None:
            lines.append(f"best {monitor}: {best.monitor_value:.5f} (epoch {best.epoch})")
    if (run_dir / "best.ckpt").is_file():
        lines.append("")
        lines.extend(describe_checkpoint(load_checkpoint(run_dir / "best.ckpt")))
    return lines


def inspect_target(target: str | Path) -> str:
    """Summarize a checkpoint file, a processed dataset or a run directory.

    Raises:
        DataError: If the target does not exist or is not recognized.
    """
    path = Path(target)
    if path.is_file():
        lines = describe_checkpoint(load_checkpoint(path))
    elif (path / "history.jsonl").is_file():
        lines = describe_run(path)
    elif (path / "stats.json").is_file():
        lines = describe_dataset(path)
    else:
        raise DataError(f"{path} is not a checkpoint, dataset directory or run directory")
    return "\n".join(lines) + "\n"
