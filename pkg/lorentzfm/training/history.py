"""Per-epoch run history.

``history.jsonl`` holds one record per epoch followed by a summary line
with the final lifecycle state. Wall-clock seconds go to
``timings.jsonl`` instead, so two runs with the same seed produce the
same history bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict

from lorentzfm.errors import DataError


class EpochRecord(BaseModel):
    """Outcome of one epoch.

    Attributes:
        epoch: 0-based epoch number.
        state: Lifecycle phase the epoch ran in.
        learning_rate: Effective learning rate.
        train_loss: Mean per-instance BCE over the epoch.
        monitor: Name of the validation monitor.
        monitor_value: Validation monitor value.
        improved: Whether this epoch set a new best.
        instances: Training instances seen, sampled negatives included.
        seconds: Wall time of the epoch; not written to the history file.
    """

    model_config = ConfigDict(extra="forbid")

    epoch: int
    state: str
    learning_rate: float
    train_loss: float
    monitor: str
    monitor_value: float
    improved: bool
    instances: int
    seconds: float = 0.0


@dataclass
class RunHistory:
    """Epoch records plus the run's final state."""

    records: list[EpochRecord] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    def best(self, higher_is_better: bool) -> EpochRecord | None:
        """First record with the best monitor value."""
        if not self.records:
            return None
        pick = max if higher_is_better else min
        target = pick(r.monitor_value for r in self.records)
        return next(r for r in self.records if r.monitor_value == target)

    def mean_seconds(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.seconds for r in self.records) / len(self.records)

    def save(self, run_dir: str | Path) -> None:
        """Write ``history.jsonl`` and ``timings.jsonl`` into ``run_dir``."""
        root = Path(run_dir)
        root.mkdir(parents=True, exist_ok=True)
        with (root / "history.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
            for record in self.records:
                fh.write(json.dumps(record.model_dump(exclude={"seconds"}), sort_keys=True) + "\n")
            fh.write(json.dumps({"summary": self.summary}, sort_keys=True) + "\n")
        with (root / "timings.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
            for record in self.records:
                fh.write(json.dumps({"epoch": record.epoch, "seconds": record.seconds}) + "\n")

    @classmethod
    def load(cls, run_dir: str | Path) -> RunHistory:
        """Read a run directory's history, merging timings when present.

        Raises:
            DataError: If ``history.jsonl`` is missing or malformed.
        """
        root = Path(run_dir)
        history = cls()
        try:
            lines = (root / "history.jsonl").read_text(encoding="utf-8").splitlines()
            for line in lines:
                data = json.loads(line)
                if "summary" in data:
                    history.summary = dict(data["summary"])
                else:
                    history.append(EpochRecord.model_validate(data))
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read run history in {root}: {exc}") from exc

        timings = root / "timings.jsonl"
        if timings.is_file():
            seconds = {}
            for line in timings.read_text(encoding="utf-8").splitlines():
                entry = json.loads(line)
                seconds[int(entry["epoch"])] = float(entry["seconds"])
            history.records = [
                r.model_copy(update={"seconds": seconds.get(r.epoch, 0.0)}) for r in history.records
            ]
        return history
