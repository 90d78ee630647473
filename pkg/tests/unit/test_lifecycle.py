"""Tests for the training-run lifecycle.

Verifies:
- Valid and invalid phase transitions
- Burn-in handling at epoch boundaries
- Terminal states and serialization
"""

from __future__ import annotations

import pytest

from lorentzfm.errors import LorentzFMError
from lorentzfm.training import VALID_TRANSITIONS, InvalidTransitionError, RunLifecycle, RunState


class TestRunState:
    """Tests for RunState enum."""

    def test_all_states_defined(self) -> None:
        """Every phase of a run is defined."""
        assert {s.value for s in RunState} == {
            "init",
            "burn_in",
            "training",
            "early_stopped",
            "completed",
            "diverged",
        }

    def test_terminal_states_have_no_transitions(self) -> None:
        """Stopped, completed and diverged runs cannot move again."""
        for state in (RunState.EARLY_STOPPED, RunState.COMPLETED, RunState.DIVERGED):
            assert VALID_TRANSITIONS[state] == []


class TestRunLifecycle:
    """Tests for RunLifecycle."""

    def test_starts_in_init(self) -> None:
        """A new lifecycle is in INIT with no history."""
        lifecycle = RunLifecycle()
        assert lifecycle.current_state is RunState.INIT
        assert lifecycle.history == []
        assert not lifecycle.is_terminal()

    def test_burn_in_then_training(self) -> None:
        """Epochs before the burn-in boundary run in BURN_IN."""
        lifecycle = RunLifecycle()
        for epoch in range(4):
            lifecycle.begin_epoch(epoch, burn_in_epochs=2)
        assert lifecycle.current_state is RunState.TRAINING
        assert lifecycle.history == [
            (RunState.INIT, RunState.BURN_IN, 0),
            (RunState.BURN_IN, RunState.TRAINING, 2),
        ]

    def test_no_burn_in_skips_phase(self) -> None:
        """Zero burn-in epochs go straight to TRAINING."""
        lifecycle = RunLifecycle()
        lifecycle.begin_epoch(0, burn_in_epochs=0)
        assert lifecycle.history == [(RunState.INIT, RunState.TRAINING, 0)]

    def test_stop_during_burn_in(self) -> None:
        """A run can stop early before burn-in ends."""
        lifecycle = RunLifecycle()
        lifecycle.begin_epoch(0, burn_in_epochs=5)
        lifecycle.transition_to(RunState.EARLY_STOPPED, 1)
        assert lifecycle.is_terminal()

    def test_invalid_transition(self) -> None:
        """INIT cannot complete without running."""
        lifecycle = RunLifecycle()
        with pytest.raises(InvalidTransitionError) as exc_info:
            lifecycle.transition_to(RunState.COMPLETED, 0)
        assert exc_info.value.from_state is RunState.INIT
        assert exc_info.value.to_state is RunState.COMPLETED
        assert isinstance(exc_info.value, LorentzFMError)

    def test_no_transition_out_of_terminal(self) -> None:
        """A completed run stays completed."""
        lifecycle = RunLifecycle()
        lifecycle.begin_epoch(0, burn_in_epochs=0)
        lifecycle.transition_to(RunState.COMPLETED, 0)
        assert not lifecycle.can_transition_to(RunState.TRAINING)

    def test_round_trip(self) -> None:
        """to_dict and from_dict preserve state, history and context."""
        lifecycle = RunLifecycle()
        lifecycle.begin_epoch(0, burn_in_epochs=1)
        lifecycle.begin_epoch(1, burn_in_epochs=1)
        lifecycle.context["best_epoch"] = 1
        restored = RunLifecycle.from_dict(lifecycle.to_dict())
        assert restored.current_state is RunState.TRAINING
        assert restored.history == lifecycle.history
        assert restored.context == {"best_epoch": 1}
