"""Tests for the optimizers.

Verifies:
- Burn-in learning-rate schedule
- Riemannian gradients are tangent and RSGD stays on the manifold
- Non-finite gradients are rejected
- Row gradients are averaged over their batch occurrences
- Single small steps lower the loss of pair instances
- Adam bias correction and decoupled weight decay; shape errors are config errors
"""

from __future__ import annotations

import numpy as np
import pytest

from lorentzfm.data.instances import FeatureEntry, SparseInstance
from lorentzfm.errors import ConfigError
from lorentzfm.geometry import NonFiniteError, lift, lorentz_inner, manifold_residual, origin
from lorentzfm.models import FactorizationMachine, LorentzFM, ParamGradient, lfm_forward, lfm_grad
from lorentzfm.models.lorentz_fm import EmbeddingTable
from lorentzfm.optim import (
    Adam,
    AdamConfig,
    AdamShapeError,
    AdamState,
    RiemannianSGD,
    RsgdConfig,
    adam_step,
    effective_lr,
    riemannian_grad,
    rsgd_step,
)
from lorentzfm.optim.rsgd import row_average


class TestSchedule:
    """Tests for the burn-in schedule."""

    def test_burn_in_rate(self) -> None:
        """Epochs before burn_in_epochs use the reduced rate."""
        cfg = RsgdConfig(learning_rate=0.5, burn_in_epochs=2, burn_in_factor=0.1)
        assert effective_lr(0, cfg) == pytest.approx(0.05)
        assert effective_lr(1, cfg) == pytest.approx(0.05)
        assert effective_lr(2, cfg) == 0.5

    def test_no_burn_in(self) -> None:
        """A zero burn-in uses the full rate from epoch 0."""
        assert effective_lr(0, RsgdConfig(learning_rate=0.2, burn_in_epochs=0)) == 0.2

    def test_negative_epoch(self) -> None:
        """Negative epochs are invalid."""
        with pytest.raises(ValueError):
            effective_lr(-1, RsgdConfig())


class TestRsgd:
    """Tests for Riemannian SGD."""

    def test_riemannian_grad_is_tangent(self) -> None:
        """The converted gradient is orthogonal to the base point."""
        rng = np.random.default_rng(0)
        x = lift(rng.normal(size=(50, 3)))
        h = riemannian_grad(x, rng.normal(size=(50, 4)))
        np.testing.assert_allclose(lorentz_inner(x, h), 0.0, atol=1e-9)

    def test_zero_gradient_is_identity(self) -> None:
        """A zero gradient leaves the point in place."""
        x = lift([0.3, 0.1])
        np.testing.assert_allclose(rsgd_step(x, np.zeros(3), 0.1), x, atol=1e-15)

    def test_descends_distance_objective(self) -> None:
        """Small steps on -x0 (distance from origin) move towards the origin."""
        x = lift([1.0, -0.5])
        g = np.array([1.0, 0.0, 0.0])
        moved = rsgd_step(x, g, 0.05)
        assert moved[0] < x[0]

    def test_stays_on_manifold_over_many_steps(self) -> None:
        """10^4 noisy steps keep the residual at rounding level."""
        rng = np.random.default_rng(42)
        x = lift(rng.normal(size=(20, 9)))
        for _ in range(10_000):
            x = rsgd_step(x, rng.normal(size=x.shape) * 1e-2, 0.1, check=False)
        assert float(np.max(manifold_residual(x))) < 1e-9

    def test_rejects_non_finite_gradient(self) -> None:
        """NaN gradients raise NonFiniteError."""
        with pytest.raises(NonFiniteError):
            rsgd_step(origin(3), [np.nan, 0.0, 0.0], 0.1)

    def test_rejects_non_positive_rate(self) -> None:
        """The learning rate must be positive."""
        with pytest.raises(ValueError):
            rsgd_step(origin(3), np.zeros(3), 0.0)

    def test_optimizer_skips_bad_rows(self) -> None:
        """Rows with non-finite gradients are skipped and counted."""
        model = LorentzFM.initialize(4, 3, seed=0)
        before = model.table.weights.copy()
        grad = np.array([[0.0, 1.0, 0.0], [np.inf, 0.0, 0.0]])
        opt = RiemannianSGD(RsgdConfig(learning_rate=0.1, burn_in_epochs=0))
        opt.apply(model, {"embeddings": ParamGradient(grad=grad, rows=np.array([0, 2]))}, epoch=0)
        assert opt.rejected_rows == 1
        np.testing.assert_array_equal(model.table.weights[2], before[2])
        assert not np.array_equal(model.table.weights[0], before[0])
        assert model.table.max_residual() < 1e-12

    def test_row_average_divides_by_counts(self) -> None:
        """Summed row gradients are divided by the slots that hit each row."""
        grad = ParamGradient(grad=np.array([[2.0, 4.0], [3.0, 3.0]]), rows=np.array([1, 5]), counts=np.array([2, 1]))
        np.testing.assert_allclose(row_average(grad), [[1.0, 2.0], [3.0, 3.0]])
        plain = ParamGradient(grad=np.ones((1, 2)), rows=np.array([0]))
        np.testing.assert_array_equal(row_average(plain), np.ones((1, 2)))

    def test_apply_uses_row_averages(self) -> None:
        """A row hit twice in a batch moves as if hit once with the mean gradient."""
        once = LorentzFM.initialize(6, 3, seed=1)
        twice = LorentzFM.initialize(6, 3, seed=1)
        opt = RiemannianSGD(RsgdConfig(learning_rate=0.1, burn_in_epochs=0))
        g = np.array([[0.0, 0.3, -0.2]])
        opt.apply(once, {"embeddings": ParamGradient(grad=g, rows=np.array([3]), counts=np.array([1]))}, 0)
        opt.apply(twice, {"embeddings": ParamGradient(grad=2 * g, rows=np.array([3]), counts=np.array([2]))}, 0)
        np.testing.assert_allclose(twice.table.weights, once.table.weights, atol=1e-15)

    def test_single_step_lowers_pair_loss(self) -> None:
        """One step at lr 1e-3 lowers the BCE of a pair instance in 1000 trials."""
        rng = np.random.default_rng(17)
        table = EmbeddingTable(weights=np.asarray(lift(rng.normal(size=(50, 2)))))

        def loss(inst: SparseInstance, weights: np.ndarray) -> float:
            score = lfm_forward(inst, EmbeddingTable(weights=weights))
            return float(np.logaddexp(0.0, -score if inst.label else score))

        for _ in range(1000):
            i, j = rng.choice(50, size=2, replace=False)
            inst = SparseInstance(
                entries=[FeatureEntry("a", int(i)), FeatureEntry("b", int(j))], label=int(rng.integers(0, 2))
            )
            moved = table.weights.copy()
            for row, g in lfm_grad(inst, table).items():
                moved[row] = rsgd_step(table.weights[row], g, 1e-3)
            assert loss(inst, moved) < loss(inst, table.weights)

    def test_diagnostics(self) -> None:
        """The rejected-row counter is reported as a diagnostic."""
        opt = RiemannianSGD(RsgdConfig())
        opt.rejected_rows = 3
        assert opt.diagnostics() == {"rejected_rows": 3}
        assert Adam(AdamConfig()).diagnostics() == {}

    def test_rejects_fm_model(self) -> None:
        """RSGD only updates LorentzFM tables."""
        opt = RiemannianSGD(RsgdConfig())
        with pytest.raises(TypeError):
            opt.apply(FactorizationMachine.initialize(3, 2, seed=0), {}, epoch=0)


class TestAdam:
    """Tests for Adam."""

    def test_first_step_magnitude(self) -> None:
        """With bias correction the first step is lr * sign(g) (no decay)."""
        cfg = AdamConfig(learning_rate=0.01, weight_decay=0.0)
        params = {"w": np.array([1.0, -2.0])}
        grads = {"w": np.array([3.0, -0.5])}
        updated, state = adam_step(params, grads, AdamState(), cfg)
        np.testing.assert_allclose(updated["w"], [0.99, -1.99], rtol=1e-6)
        assert state.step == 1

    def test_decoupled_weight_decay(self) -> None:
        """Zero gradients still shrink parameters by lr * lambda * theta."""
        cfg = AdamConfig(learning_rate=0.1, weight_decay=0.5)
        updated, _ = adam_step({"w": np.array([2.0])}, {"w": np.array([0.0])}, AdamState(), cfg)
        assert updated["w"][0] == pytest.approx(2.0 - 0.1 * 0.5 * 2.0)

    def test_inputs_not_mutated(self) -> None:
        """adam_step returns new arrays."""
        params = {"w": np.array([1.0])}
        adam_step(params, {"w": np.array([1.0])}, AdamState(), AdamConfig())
        assert params["w"][0] == 1.0

    def test_shape_mismatch(self) -> None:
        """A gradient of the wrong shape is a configuration error (exit code 2)."""
        with pytest.raises(AdamShapeError) as exc_info:
            adam_step({"w": np.zeros(2)}, {"w": np.zeros(3)}, AdamState(), AdamConfig())
        assert isinstance(exc_info.value, ConfigError)
        assert exc_info.value.exit_code == 2

    def test_state_round_trip(self) -> None:
        """Optimizer state survives conversion to checkpoint arrays."""
        opt = Adam(AdamConfig())
        model = FactorizationMachine.initialize(5, 2, seed=0)
        grads = model.gradients(np.array([[0, 3]]), np.ones((1, 2)), np.array([1.0]))
        opt.apply(model, grads, epoch=0)
        restored = Adam(AdamConfig())
        restored.load_state_arrays(opt.state_arrays())
        assert restored.state.step == 1
        np.testing.assert_array_equal(restored.state.m["factors"], opt.state.m["factors"])
