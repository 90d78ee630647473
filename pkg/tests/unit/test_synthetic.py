"""Tests for synthetic CTR data.

Verifies:
- Generation is reproducible per seed
- Schema layout and split sizes
- Bayes AUC bookkeeping, including the zero-signal case
- Learnability on the default planted data and chance level without signal (slow)
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from lorentzfm.data import DatasetBundle, FieldSide, Task
from lorentzfm.errors import ConfigError
from lorentzfm.evaluation import auc, evaluate_model
from lorentzfm.models import ModelKind
from lorentzfm.training import SyntheticSpec, TrainConfig, generate_synthetic, load_synthetic_spec, train


class TestGenerateSynthetic:
    """Tests for generate_synthetic."""

    def test_layout(self, ctr_bundle: DatasetBundle) -> None:
        """Four fields split into two user-side and two item-side fields."""
        schema = ctr_bundle.schema
        assert ctr_bundle.task is Task.CTR
        assert schema.field_names == ["f0", "f1", "f2", "f3"]
        assert schema.count_side(FieldSide.USER) == 2
        assert schema.count_side(FieldSide.ITEM) == 2
        assert [len(ctr_bundle.split(n)) for n in ("train", "val", "test")] == [320, 40, 40]
        assert ctr_bundle.feature_count <= 4 * (5 + 1)

    def test_reproducible(self) -> None:
        """The same seed produces the same instances and labels."""
        spec = SyntheticSpec(n_fields=3, cardinality=4, n_instances=100, dim=3)
        a = generate_synthetic(spec, seed=5)
        b = generate_synthetic(spec, seed=5)
        np.testing.assert_array_equal(a.train.indices, b.train.indices)
        np.testing.assert_array_equal(a.train.labels, b.train.labels)
        assert a.meta == b.meta

    def test_meta(self, ctr_bundle: DatasetBundle) -> None:
        """Meta carries the generator settings, Bayes AUCs and the positive rate."""
        meta = ctr_bundle.meta
        assert meta["synthetic"]["n_fields"] == 4
        assert 0.5 < meta["bayes_auc"] <= 1.0
        assert 0.0 < meta["positive_rate"] < 1.0
        assert meta["bayes_auc_test"] is not None

    def test_zero_signal_is_noise(self) -> None:
        """Without signal the true probabilities are constant and Bayes AUC is 0.5."""
        spec = SyntheticSpec(n_fields=3, cardinality=4, n_instances=500, dim=3, signal=0.0)
        bundle = generate_synthetic(spec, seed=1)
        assert bundle.meta["bayes_auc"] == pytest.approx(0.5)

    def test_load_spec(self, tmp_path: Path) -> None:
        """Spec files are validated."""
        path = tmp_path / "spec.toml"
        path.write_text("n_fields = 3\ncardinality = 7\n", encoding="utf-8")
        assert load_synthetic_spec(path).cardinality == 7
        path.write_text("n_fields = 1\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_synthetic_spec(path)


@pytest.mark.slow
class TestLearnability:
    """Models trained on the default planted data approach the Bayes ceiling."""

    @pytest.fixture(scope="class")
    def bundle(self) -> DatasetBundle:
        return generate_synthetic(SyntheticSpec(), seed=0)

    @staticmethod
    def _val_auc(bundle: DatasetBundle, model: ModelKind) -> float:
        config = TrainConfig(task=Task.CTR, model=model, embedding_size=10, max_epochs=50)
        result = train(config, bundle)
        val = bundle.val
        return auc(result.model.scores(val.indices, val.values), val.labels)

    def test_default_spec_shape(self, bundle: DatasetBundle) -> None:
        """12 fields, about 2000 features, 50K instances and a Bayes AUC of at least 0.95."""
        assert len(bundle.schema.fields) == 12
        assert 1900 <= bundle.feature_count <= 12 * 167
        assert bundle.stats.samples == 50_000
        assert bundle.meta["bayes_auc_val"] >= 0.95

    def test_lorentz_learns(self, bundle: DatasetBundle) -> None:
        """LorentzFM with k = 10 reaches a validation AUC of 0.90 within 50 epochs."""
        assert self._val_auc(bundle, ModelKind.LORENTZ_FM) >= 0.90

    def test_fm_learns(self, bundle: DatasetBundle) -> None:
        """The FM baseline with k = 10 reaches a validation AUC of 0.85 within 50 epochs."""
        assert self._val_auc(bundle, ModelKind.FM) >= 0.85


@pytest.mark.slow
class TestNullModel:
    """Training on labels without signal stays at chance."""

    @pytest.mark.parametrize("model", [ModelKind.LORENTZ_FM, ModelKind.FM])
    def test_zero_signal(self, model: ModelKind) -> None:
        """With signal 0 the trained test AUC lies in [0.45, 0.55]."""
        bundle = generate_synthetic(SyntheticSpec(n_instances=20_000, signal=0.0), seed=4)
        config = TrainConfig(task=Task.CTR, model=model, embedding_size=10, max_epochs=10, patience=3)
        result = train(config, bundle)
        value = evaluate_model(result.model, bundle, "test").metrics["AUC"]
        assert 0.45 <= value <= 0.55
