"""Training run lifecycle - tracks which phase a run is in.

A run follows the flow:
INIT -> BURN_IN -> TRAINING -> EARLY_STOPPED | COMPLETED | DIVERGED

BURN_IN is skipped when no burn-in epochs are configured, and a run can
stop or diverge during burn-in. The terminal state is recorded in the
run history file.
"""

from __future__ import annotations

from enum import Enum
from typing import Any

from lorentzfm.errors import LorentzFMError


class RunState(str, Enum):
    """Phases of a training run."""

    INIT = "init"
    BURN_IN = "burn_in"
    TRAINING = "training"
    # Terminal states
    EARLY_STOPPED = "early_stopped"
    COMPLETED = "completed"
    DIVERGED = "diverged"


_ENDINGS = [RunState.EARLY_STOPPED, RunState.COMPLETED, RunState.DIVERGED]

VALID_TRANSITIONS: dict[RunState, list[RunState]] = {
    RunState.INIT: [RunState.BURN_IN, RunState.TRAINING, RunState.DIVERGED],
    RunState.BURN_IN: [RunState.TRAINING, *_ENDINGS],
    RunState.TRAINING: list(_ENDINGS),
    RunState.EARLY_STOPPED: [],
    RunState.COMPLETED: [],
    RunState.DIVERGED: [],
}


class InvalidTransitionError(LorentzFMError):
    """Raised when an invalid run-state transition is attempted."""

    def __init__(self, from_state: RunState, to_state: RunState) -> None:
        self.from_state = from_state
        self.to_state = to_state
        super().__init__(f"Invalid transition from {from_state.value} to {to_state.value}")


class RunLifecycle:
    """Enforces valid phase changes of a training run.

    Attributes:
        current_state: Phase the run is in.
        history: ``(from_state, to_state, epoch)`` transitions.
        context: Free-form run facts (best epoch, stop reason).
    """

    def __init__(self, initial_state: RunState = RunState.INIT) -> None:
        self._current_state = initial_state
        self._history: list[tuple[RunState, RunState, int]] = []
        self._context: dict[str, Any] = {}

    @property
    def current_state(self) -> RunState:
        return self._current_state

    @property
    def history(self) -> list[tuple[RunState, RunState, int]]:
        return self._history.copy()

    @property
    def context(self) -> dict[str, Any]:
        return self._context

    def can_transition_to(self, target_state: RunState) -> bool:
        return target_state in VALID_TRANSITIONS[self._current_state]

    def transition_to(self, target_state: RunState, epoch: int) -> None:
        """Move to ``target_state`` at ``epoch``.

        Raises:
            InvalidTransitionError: If the transition is not valid.
        """
        if not self.can_transition_to(target_state):
            raise InvalidTransitionError(self._current_state, target_state)
        self._history.append((self._current_state, target_state, epoch))
        self._current_state = target_state

    def begin_epoch(self, epoch: int, burn_in_epochs: int) -> None:
        """Enter the phase an epoch belongs to, if not already in it."""
        wanted = RunState.BURN_IN if epoch < burn_in_epochs else RunState.TRAINING
        if self._current_state is not wanted:
            self.transition_to(wanted, epoch)

    def is_terminal(self) -> bool:
        return not VALID_TRANSITIONS[self._current_state]

    def to_dict(self) -> dict[str, Any]:
        """Serialize for the run history file."""
        return {
            "current_state": self._current_state.value,
            "history": [(f.value, t.value, e) for f, t, e in self._history],
            "context": self._context,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunLifecycle:
        lifecycle = cls(initial_state=RunState(data["current_state"]))
        lifecycle._history = [(RunState(f), RunState(t), int(e)) for f, t, e in data.get("history", [])]
        lifecycle._context = dict(data.get("context", {}))
        return lifecycle
