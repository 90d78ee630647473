"""Training loop.

Each epoch builds the training instances (for ranking, the positives
plus freshly sampled negatives), shuffles them into minibatches, applies
one optimizer update per minibatch with the gradient of the summed BCE
loss (RSGD then averages each row over its occurrences), then scores
the validation split for early stopping. The best model by validation
monitor is kept and, with a run directory, written as
``best.ckpt`` next to ``last.ckpt``, ``history.jsonl`` and
``config.json``.

All randomness of epoch ``e`` comes from a generator seeded with
``(seed, e)``, so a run is reproducible whatever the thread count,
unless asynchronous updates are enabled.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from lorentzfm.data.bundle import DatasetBundle
from lorentzfm.data.instances import InstanceBatch
from lorentzfm.data.sampling import NegativeSampler
from lorentzfm.data.schema import Task
from lorentzfm.errors import ConfigError, DataError, NumericError
from lorentzfm.evaluation.metrics import logloss, mrr
from lorentzfm.evaluation.ranking import rank_split
from lorentzfm.geometry import check_on_manifold
from lorentzfm.models import Checkpoint, InteractionModel, LorentzFM, ModelKind, build_model, save_checkpoint
from lorentzfm.optim.adam import Adam
from lorentzfm.optim.base import ModelOptimizer
from lorentzfm.optim.rsgd import RiemannianSGD
from lorentzfm.training.config import Monitor, TrainConfig
from lorentzfm.training.history import EpochRecord, RunHistory
from lorentzfm.training.lifecycle import RunLifecycle, RunState
from lorentzfm.training.loss import bce_loss

logger = logging.getLogger(__name__)

# Seed stream of fixed negatives when resample_negatives is off.
_FIXED_NEGATIVES_STREAM = 2**31 - 1

MonitorFn = Callable[[InteractionModel, int], float]


class DivergenceError(NumericError):
    """Raised when the training loss stops being finite."""

    pass


@dataclass
class TrainResult:
    """Outcome of :func:`train`.

    Attributes:
        model: Model restored from the best checkpoint.
        checkpoint: Best-monitor checkpoint.
        history: Per-epoch records.
        lifecycle: Final lifecycle, in a terminal state.
    """

    model: InteractionModel
    checkpoint: Checkpoint
    history: RunHistory
    lifecycle: RunLifecycle


def build_optimizer(config: TrainConfig) -> ModelOptimizer:
    """RSGD for LorentzFM, Adam for the FM baseline."""
    if config.model is ModelKind.LORENTZ_FM:
        return RiemannianSGD(config.rsgd)
    return Adam(config.adam)


def with_negatives(bundle: DatasetBundle, negatives: npt.NDArray[np.int64]) -> InstanceBatch:
    """Training positives followed by one negative instance per sampled item.

    ``negatives`` has one row per training positive; negatives reuse the
    positive's user-side and context slots and carry label 0.
    """
    positives = bundle.train
    per_positive = negatives.shape[1]
    repeated = positives.take(np.repeat(np.arange(len(positives)), per_positive))
    negative = bundle.with_items(repeated, negatives.reshape(-1))
    negative.labels[:] = 0.0
    return InstanceBatch.concat([positives, negative])


class Trainer:
    """Runs one training job.

    Args:
        config: Run hyper-parameters.
        bundle: Dataset whose task must match ``config.task``.
        run_dir: Directory for checkpoints and history, or None.
        threads: Worker threads for validation ranking and asynchronous
            updates.
        monitor_fn: Replaces the validation monitor; called with the
            model and the epoch.

    Raises:
        ConfigError: If the dataset task differs from the config task.
    """

    def __init__(
        self,
        config: TrainConfig,
        bundle: DatasetBundle,
        run_dir: str | Path | None = None,
        threads: int = 1,
        monitor_fn: MonitorFn | None = None,
    ) -> None:
        if bundle.task is not config.task:
            raise ConfigError(f"config task {config.task.value} does not match dataset task {bundle.task.value}")
        if len(bundle.train) == 0:
            raise DataError("training split is empty")
        self.config = config
        self.bundle = bundle
        self.run_dir = Path(run_dir) if run_dir is not None else None
        self.threads = max(1, threads)
        self.monitor = config.resolved_monitor
        self.monitor_fn = monitor_fn or self._validation_monitor
        self.model = build_model(config.model, bundle.feature_count, config.embedding_size, config.seed)
        self.optimizer = build_optimizer(config)
        self.sampler = NegativeSampler.from_bundle(bundle) if config.task is Task.RANKING else None
        self.lifecycle = RunLifecycle()
        self.history = RunHistory()
        self._fixed_negatives: npt.NDArray[np.int64] | None = None

    def _validation_monitor(self, model: InteractionModel, epoch: int) -> float:
        if len(self.bundle.val) == 0:
            raise DataError("validation split is empty; early stopping needs it")
        if self.monitor is Monitor.MRR:
            results = rank_split(
                model,
                self.bundle,
                "val",
                sample=self.config.val_candidate_sample,
                seed=self.config.seed,
                threads=self.threads,
                exclude_padding=self.config.exclude_padding,
            )
            return mrr(results)
        val = self.bundle.val
        probs = model.predict(val.indices, val.effective_values(self.config.exclude_padding))
        return logloss(probs, val.labels)

    def epoch_instances(self, epoch: int, rng: np.random.Generator) -> InstanceBatch:
        """Instances of one epoch: CTR rows, or ranking positives plus negatives."""
        if self.sampler is None:
            return self.bundle.train
        users = self.bundle.train.users
        count = self.config.negatives_per_positive
        if self.config.resample_negatives:
            negatives = self.sampler.sample_batch(users, count, rng)
        else:
            if self._fixed_negatives is None:
                fixed_rng = np.random.default_rng([self.config.seed, _FIXED_NEGATIVES_STREAM])
                self._fixed_negatives = self.sampler.sample_batch(users, count, fixed_rng)
            negatives = self._fixed_negatives
        return with_negatives(self.bundle, negatives)

    def _step(self, batch: InstanceBatch, epoch: int) -> float:
        values = batch.effective_values(self.config.exclude_padding)
        probs = self.model.predict(batch.indices, values)
        loss = bce_loss(probs, batch.labels)
        coef = probs - batch.labels
        grads = self.model.gradients(batch.indices, values, coef)
        self.optimizer.apply(self.model, grads, epoch)
        return loss

    def run_epoch(self, epoch: int) -> tuple[float, int]:
        """One pass over the epoch's instances; returns (mean loss, instance count)."""
        rng = np.random.default_rng([self.config.seed, epoch])
        data = self.epoch_instances(epoch, rng)
        order = rng.permutation(len(data))
        size = self.config.batch_size
        batches = [data.take(order[start : start + size]) for start in range(0, len(data), size)]

        if self.config.asynchronous and self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                losses = list(pool.map(lambda b: self._step(b, epoch), batches))
        else:
            losses = [self._step(b, epoch) for b in batches]
        return sum(losses) / len(data), len(data)

    def _check_manifold(self) -> None:
        if isinstance(self.model, LorentzFM):
            check_on_manifold(self.model.table.weights)

    def _checkpoint(self, epoch: int, value: float) -> Checkpoint:
        return Checkpoint.from_model(
            self.model,
            seed=self.config.seed,
            optimizer=self.optimizer.state_arrays(),
            metadata={
                "epoch": epoch,
                "task": self.config.task.value,
                "monitor": self.monitor.value,
                "monitor_value": value,
                "exclude_padding": self.config.exclude_padding,
                "config_digest": self.config.digest(),
            },
        )

    def _finish(self, state: RunState, epoch: int) -> None:
        self.lifecycle.transition_to(state, epoch)
        diagnostics: dict[str, int] = dict(self.optimizer.diagnostics())
        if self.sampler is not None:
            diagnostics["negative_shortfalls"] = self.sampler.shortfalls
        self.history.summary = {
            "final_state": state.value,
            "epochs": len(self.history),
            "diagnostics": diagnostics,
            **self.lifecycle.to_dict(),
        }
        if self.run_dir is not None:
            self.history.save(self.run_dir)

    def run(self) -> TrainResult:
        """Train until early stopping or ``max_epochs``.

        Raises:
            DivergenceError: If an epoch's loss is not finite.
            ManifoldDomainError: If an embedding leaves the hyperboloid.
        """
        cfg = self.config
        if self.run_dir is not None:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            (self.run_dir / "config.json").write_text(cfg.model_dump_json(indent=2) + "\n", encoding="utf-8")

        higher = self.monitor.higher_is_better
        best_value = -np.inf if higher else np.inf
        best: Checkpoint | None = None
        stale = 0
        final = RunState.COMPLETED
        epoch = 0

        for epoch in range(cfg.max_epochs):
            self.lifecycle.begin_epoch(epoch, cfg.rsgd.burn_in_epochs if cfg.model is ModelKind.LORENTZ_FM else 0)
            started = time.perf_counter()
            train_loss, seen = self.run_epoch(epoch)
            if not np.isfinite(train_loss):
                self._finish(RunState.DIVERGED, epoch)
                raise DivergenceError(f"training loss became {train_loss} at epoch {epoch}")
            self._check_manifold()

            value = float(self.monitor_fn(self.model, epoch))
            improved = value > best_value if higher else value < best_value
            if improved:
                best_value, stale = value, 0
                best = self._checkpoint(epoch, value)
                self.lifecycle.context["best_epoch"] = epoch
                if self.run_dir is not None:
                    save_checkpoint(self.run_dir / "best.ckpt", best)
            else:
                stale += 1

            record = EpochRecord(
                epoch=epoch,
                state=self.lifecycle.current_state.value,
                learning_rate=self.optimizer.learning_rate(epoch),
                train_loss=train_loss,
                monitor=self.monitor.value,
                monitor_value=value,
                improved=improved,
                instances=seen,
                seconds=time.perf_counter() - started,
            )
            self.history.append(record)
            if self.run_dir is not None:
                save_checkpoint(self.run_dir / "last.ckpt", self._checkpoint(epoch, value))
            logger.info(
                "epoch %d [%s] lr=%.4g loss=%.5f %s=%.5f%s",
                epoch,
                record.state,
                record.learning_rate,
                train_loss,
                self.monitor.value,
                value,
                " *" if improved else "",
            )

            if stale >= cfg.patience:
                logger.info("Early stopping after epoch %d (%d epochs without improvement)", epoch, stale)
                final = RunState.EARLY_STOPPED
                break

        self.lifecycle.context["stale_epochs"] = stale
        self._finish(final, epoch)
        if best is None:
            # A monitor that is never finite never improves.
            raise DivergenceError(f"validation {self.monitor.value} was never finite")
        return TrainResult(
            model=best.to_model(),
            checkpoint=best,
            history=self.history,
            lifecycle=self.lifecycle,
        )


def train(
    config: TrainConfig,
    bundle: DatasetBundle,
    run_dir: str | Path | None = None,
    threads: int = 1,
) -> TrainResult:
    """Train a model on ``bundle`` and return its best checkpoint."""
    return Trainer(config, bundle, run_dir=run_dir, threads=threads).run()
