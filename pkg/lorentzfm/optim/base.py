"""Optimizer interface used by the training engine."""

from __future__ import annotations

from abc import ABC, abstractmethod

from lorentzfm.models.base import FloatArray, InteractionModel, ParamGradient


class ModelOptimizer(ABC):
    """Applies one update to a model from batch gradients.

    Gradients passed to :meth:`apply` are summed over the minibatch;
    each touched parameter row receives exactly one update.
    """

    @abstractmethod
    def learning_rate(self, epoch: int) -> float:
        """Learning rate in effect for ``epoch`` (0-based)."""
        ...

    @abstractmethod
    def apply(self, model: InteractionModel, grads: dict[str, ParamGradient], epoch: int) -> None:
        """Update ``model`` in place."""
        ...

    def state_arrays(self) -> dict[str, FloatArray]:
        """Optimizer state for checkpointing; stateless optimizers return {}."""
        return {}

    def load_state_arrays(self, arrays: dict[str, FloatArray]) -> None:  # noqa: B027
        """Restore state saved by :meth:`state_arrays`."""

    def diagnostics(self) -> dict[str, int]:
        """Counters worth keeping in the run summary."""
        return {}
