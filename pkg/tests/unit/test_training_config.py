"""Tests for training configuration and run history.

Verifies:
- Defaults, monitor/task consistency and cut-off normalization
- Config digests and file loading
- History files keep timings out of the deterministic record
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from lorentzfm.data import Task
from lorentzfm.errors import ConfigError, DataError
from lorentzfm.models import ModelKind
from lorentzfm.training import EpochRecord, Monitor, RunHistory, TrainConfig, bce_loss, load_train_config


class TestTrainConfig:
    """Tests for TrainConfig."""

    def test_defaults(self) -> None:
        """Defaults follow the usual ranking setup."""
        config = TrainConfig(task=Task.RANKING)
        assert config.model is ModelKind.LORENTZ_FM
        assert (config.embedding_size, config.batch_size, config.max_epochs, config.patience) == (10, 256, 100, 20)
        assert config.negatives_per_positive == 10
        assert config.rsgd.burn_in_epochs == 25
        assert config.resolved_monitor is Monitor.MRR

    def test_ctr_monitor(self) -> None:
        """CTR runs monitor logloss."""
        config = TrainConfig(task=Task.CTR)
        assert config.resolved_monitor is Monitor.LOGLOSS
        assert not config.resolved_monitor.higher_is_better

    def test_mismatched_monitor(self) -> None:
        """A ranking run cannot monitor logloss."""
        with pytest.raises(ValidationError):
            TrainConfig(task=Task.RANKING, monitor=Monitor.LOGLOSS)

    def test_lorentz_dimension(self) -> None:
        """LorentzFM needs at least two ambient dimensions; FM does not."""
        with pytest.raises(ValidationError):
            TrainConfig(task=Task.CTR, embedding_size=1)
        assert TrainConfig(task=Task.CTR, model=ModelKind.FM, embedding_size=1).embedding_size == 1

    def test_hit_ks_normalized(self) -> None:
        """Cut-offs are sorted and deduplicated."""
        assert TrainConfig(task=Task.RANKING, hit_ks=[10, 1, 10]).hit_ks == [1, 10]

    def test_unknown_key(self) -> None:
        """Unknown keys are rejected."""
        with pytest.raises(ValidationError):
            TrainConfig.model_validate({"task": "ranking", "learning_rate": 0.1})

    def test_digest(self) -> None:
        """Equal configs share a digest; different ones do not."""
        a = TrainConfig(task=Task.RANKING, seed=1)
        assert a.digest() == TrainConfig(task=Task.RANKING, seed=1).digest()
        assert a.digest() != TrainConfig(task=Task.RANKING, seed=2).digest()
        assert len(a.digest()) == 12

    def test_load_toml(self, tmp_path: Path) -> None:
        """Nested optimizer tables are parsed."""
        path = tmp_path / "train.toml"
        path.write_text('task = "ranking"\nmax_epochs = 3\n[rsgd]\nlearning_rate = 0.2\n', encoding="utf-8")
        config = load_train_config(path)
        assert config.max_epochs == 3
        assert config.rsgd.learning_rate == 0.2

    def test_load_invalid(self, tmp_path: Path) -> None:
        """Invalid files raise ConfigError."""
        path = tmp_path / "train.json"
        path.write_text(json.dumps({"task": "ctr", "monitor": "MRR"}), encoding="utf-8")
        with pytest.raises(ConfigError):
            load_train_config(path)


class TestBceLoss:
    """Tests for the training loss."""

    def test_summed(self) -> None:
        """The loss is a sum, not a mean."""
        assert bce_loss([0.5, 0.5, 0.5], [1, 0, 1]) == pytest.approx(3 * 0.6931471805599453)


class TestRunHistory:
    """Tests for RunHistory files."""

    def _history(self) -> RunHistory:
        history = RunHistory(summary={"final_state": "completed"})
        for epoch, value in enumerate([0.2, 0.3, 0.3]):
            history.append(
                EpochRecord(
                    epoch=epoch,
                    state="training",
                    learning_rate=0.1,
                    train_loss=1.0 - value,
                    monitor="MRR",
                    monitor_value=value,
                    improved=epoch == 1,
                    instances=100,
                    seconds=1.5 + epoch,
                )
            )
        return history

    def test_best_is_first_maximum(self) -> None:
        """Ties keep the earliest epoch."""
        best = self._history().best(higher_is_better=True)
        assert best is not None and best.epoch == 1

    def test_history_file_has_no_timings(self, tmp_path: Path) -> None:
        """Seconds live in timings.jsonl only."""
        self._history().save(tmp_path)
        history_text = (tmp_path / "history.jsonl").read_text(encoding="utf-8")
        assert "seconds" not in history_text
        assert json.loads(history_text.splitlines()[-1]) == {"summary": {"final_state": "completed"}}
        assert len((tmp_path / "timings.jsonl").read_text(encoding="utf-8").splitlines()) == 3

    def test_load_merges_timings(self, tmp_path: Path) -> None:
        """Loading restores per-epoch seconds."""
        self._history().save(tmp_path)
        loaded = RunHistory.load(tmp_path)
        assert [r.seconds for r in loaded.records] == [1.5, 2.5, 3.5]
        assert loaded.mean_seconds() == pytest.approx(2.5)
        assert loaded.summary["final_state"] == "completed"

    def test_missing_history(self, tmp_path: Path) -> None:
        """A directory without history.jsonl is a data error."""
        with pytest.raises(DataError):
            RunHistory.load(tmp_path)
