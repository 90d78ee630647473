"""Tests for the training engine.

Verifies:
- Early stopping keeps the best-monitor checkpoint
- Run directories hold config, checkpoints, history and run diagnostics
- Same seed, same run
- Negatives are drawn per epoch from unobserved items
- Loss descent on small data and on a repeated batch
- Embeddings stay on the manifold
- Task mismatches and divergence are reported
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from lorentzfm.data import DatasetBundle, Task
from lorentzfm.errors import ConfigError
from lorentzfm.geometry import check_on_manifold
from lorentzfm.models import FactorizationMachine, InteractionModel, LorentzFM, ModelKind, load_checkpoint
from lorentzfm.optim import AdamConfig, RsgdConfig
from lorentzfm.training import DivergenceError, RunState, TrainConfig, Trainer, train, with_negatives


def _ranking_config(**overrides: object) -> TrainConfig:
    values: dict[str, object] = {
        "task": Task.RANKING,
        "embedding_size": 3,
        "batch_size": 16,
        "max_epochs": 3,
        "patience": 3,
        "negatives_per_positive": 2,
        "seed": 11,
        "rsgd": RsgdConfig(learning_rate=0.1, burn_in_epochs=1),
    }
    values.update(overrides)
    return TrainConfig.model_validate(values)


class TestEarlyStopping:
    """Tests for early stopping and checkpoint selection."""

    def test_stops_and_returns_best_epoch(self, ranking_bundle: DatasetBundle) -> None:
        """With patience 1, a worse second epoch stops the run at epoch 0's weights."""
        values = iter([0.5, 0.4, 0.9])
        snapshots: list[np.ndarray] = []

        def monitor(model: InteractionModel, epoch: int) -> float:
            assert isinstance(model, LorentzFM)
            snapshots.append(model.table.weights.copy())
            return next(values)

        config = _ranking_config(max_epochs=10, patience=1)
        result = Trainer(config, ranking_bundle, monitor_fn=monitor).run()

        assert len(result.history) == 2
        assert result.lifecycle.current_state is RunState.EARLY_STOPPED
        assert result.checkpoint.metadata["epoch"] == 0
        assert result.checkpoint.metadata["monitor_value"] == 0.5
        assert isinstance(result.model, LorentzFM)
        np.testing.assert_array_equal(result.model.table.weights, snapshots[0])
        assert not np.array_equal(snapshots[0], snapshots[1])

    def test_strict_improvement_required(self, ranking_bundle: DatasetBundle) -> None:
        """An equal monitor value does not reset patience."""
        config = _ranking_config(max_epochs=5, patience=2)
        result = Trainer(config, ranking_bundle, monitor_fn=lambda m, e: 0.3).run()
        assert len(result.history) == 3
        assert [r.improved for r in result.history.records] == [True, False, False]

    def test_completes_without_stopping(self, ranking_bundle: DatasetBundle) -> None:
        """Improving every epoch runs to max_epochs."""
        result = Trainer(_ranking_config(), ranking_bundle, monitor_fn=lambda m, e: float(e)).run()
        assert result.lifecycle.current_state is RunState.COMPLETED
        assert result.checkpoint.metadata["epoch"] == 2
        assert [r.state for r in result.history.records] == ["burn_in", "training", "training"]
        assert result.history.records[0].learning_rate == pytest.approx(0.01)

    def test_never_finite_monitor(self, ranking_bundle: DatasetBundle) -> None:
        """A monitor that is always NaN is a divergence."""
        with pytest.raises(DivergenceError):
            Trainer(_ranking_config(), ranking_bundle, monitor_fn=lambda m, e: float("nan")).run()


class TestRunDirectory:
    """Tests for run directory artifacts."""

    def test_artifacts(self, ranking_bundle: DatasetBundle, tmp_path: Path) -> None:
        """Config, both checkpoints, history and timings are written.

        Every user leaves at least three items unobserved, so two negatives
        per positive never need replacement.
        """
        result = train(_ranking_config(), ranking_bundle, run_dir=tmp_path)
        for name in ("config.json", "best.ckpt", "last.ckpt", "history.jsonl", "timings.jsonl"):
            assert (tmp_path / name).is_file()

        best = load_checkpoint(tmp_path / "best.ckpt")
        last = load_checkpoint(tmp_path / "last.ckpt")
        values = [r.monitor_value for r in result.history.records]
        assert best.metadata["monitor_value"] == max(values)
        assert last.metadata["epoch"] == len(values) - 1
        assert best.metadata["task"] == "ranking"
        assert best.metadata["config_digest"] == _ranking_config().digest()

        summary = json.loads((tmp_path / "history.jsonl").read_text(encoding="utf-8").splitlines()[-1])
        assert summary["summary"]["final_state"] in {"completed", "early_stopped"}
        assert summary["summary"]["diagnostics"] == {
            "rejected_rows": 0,
            "negative_shortfalls": 0,
        }

    def test_same_seed_same_run(self, ranking_bundle: DatasetBundle, tmp_path: Path) -> None:
        """Two runs with one seed write identical histories and weights."""
        a = train(_ranking_config(), ranking_bundle, run_dir=tmp_path / "a")
        b = train(_ranking_config(), ranking_bundle, run_dir=tmp_path / "b")
        assert (tmp_path / "a" / "history.jsonl").read_bytes() == (tmp_path / "b" / "history.jsonl").read_bytes()
        assert a.checkpoint.arrays["embeddings"].tobytes() == b.checkpoint.arrays["embeddings"].tobytes()


class TestNegatives:
    """Tests for per-epoch negative instances."""

    def test_with_negatives_layout(self, ranking_bundle: DatasetBundle) -> None:
        """Positives come first, then labelled-0 negatives per positive."""
        n = len(ranking_bundle.train)
        negatives = np.zeros((n, 2), dtype=np.int64)
        data = with_negatives(ranking_bundle, negatives)
        assert len(data) == 3 * n
        assert np.all(data.labels[:n] == 1.0)
        assert np.all(data.labels[n:] == 0.0)
        np.testing.assert_array_equal(data.users[n:], np.repeat(ranking_bundle.train.users, 2))

    def test_epoch_negatives_unobserved(self, ranking_bundle: DatasetBundle) -> None:
        """Sampled negatives are never items the user interacted with."""
        trainer = Trainer(_ranking_config(), ranking_bundle)
        data = trainer.epoch_instances(0, np.random.default_rng(0))
        negative = data.labels == 0.0
        for user, item in zip(data.users[negative].tolist(), data.items[negative].tolist(), strict=True):
            assert item not in ranking_bundle.observed[user]

    def test_fixed_negatives(self, ranking_bundle: DatasetBundle) -> None:
        """Without resampling every epoch reuses one negative set."""
        trainer = Trainer(_ranking_config(resample_negatives=False), ranking_bundle)
        first = trainer.epoch_instances(0, np.random.default_rng(0))
        second = trainer.epoch_instances(1, np.random.default_rng(1))
        np.testing.assert_array_equal(first.items, second.items)

    def test_ctr_uses_training_rows(self, ctr_bundle: DatasetBundle) -> None:
        """CTR epochs see the training split as is."""
        trainer = Trainer(TrainConfig(task=Task.CTR, embedding_size=3), ctr_bundle)
        assert trainer.epoch_instances(0, np.random.default_rng(0)) is ctr_bundle.train


class TestLearning:
    """Smoke tests for optimization on small data."""

    def test_fm_loss_decreases(self, ctr_bundle: DatasetBundle) -> None:
        """Adam lowers the FM training loss."""
        config = TrainConfig(
            task=Task.CTR,
            model=ModelKind.FM,
            embedding_size=3,
            batch_size=32,
            max_epochs=8,
            patience=8,
            adam=AdamConfig(learning_rate=0.05, weight_decay=0.0),
        )
        result = train(config, ctr_bundle)
        losses = [r.train_loss for r in result.history.records]
        assert losses[-1] < losses[0]
        assert isinstance(result.model, FactorizationMachine)

    def test_repeated_batch_loss_never_increases(self, ctr_bundle: DatasetBundle) -> None:
        """50 RSGD steps at lr 1e-3 on one batch give a non-increasing loss."""
        config = TrainConfig(
            task=Task.CTR,
            embedding_size=3,
            rsgd=RsgdConfig(learning_rate=1e-3, burn_in_epochs=0),
        )
        trainer = Trainer(config, ctr_bundle)
        batch = ctr_bundle.train.take(np.arange(64))
        losses = [trainer._step(batch, epoch=0) for _ in range(50)]
        assert np.all(np.diff(losses) <= 1e-12)
        assert losses[-1] < losses[0]

    def test_lorentz_stays_on_manifold(self, ctr_bundle: DatasetBundle) -> None:
        """After training every embedding is still on the hyperboloid."""
        config = TrainConfig(
            task=Task.CTR,
            embedding_size=3,
            batch_size=16,
            max_epochs=3,
            rsgd=RsgdConfig(learning_rate=0.5, burn_in_epochs=0),
        )
        result = train(config, ctr_bundle)
        assert isinstance(result.model, LorentzFM)
        check_on_manifold(result.model.table.weights)
        assert all(np.isfinite(r.train_loss) for r in result.history.records)


class TestTrainerValidation:
    """Tests for Trainer argument checks."""

    def test_task_mismatch(self, ctr_bundle: DatasetBundle) -> None:
        """A ranking config cannot train on CTR data."""
        with pytest.raises(ConfigError):
            Trainer(_ranking_config(), ctr_bundle)
