"""Shared fixtures: small ranking and CTR datasets built in memory."""

from __future__ import annotations

from pathlib import Path

import pandas as pd
import pytest

from lorentzfm.data import (
    DatasetBundle,
    DatasetSchema,
    FieldSide,
    FieldSpec,
    PreprocessOptions,
    Task,
    build_bundle,
)
from lorentzfm.training import SyntheticSpec, generate_synthetic


def make_ranking_frame() -> pd.DataFrame:
    """6 users x 10 items; user k has item j unless (k + j) % 3 == 0 (40 rows)."""
    rows = []
    for k in range(6):
        for j in range(10):
            if (k + j) % 3 == 0:
                continue
            genres = f"g{j % 3}" if j % 4 == 0 else f"g{j % 3}|g{(j + 1) % 4}"
            rows.append(
                {
                    "user_id": f"u{k}",
                    "age": f"a{k % 2}",
                    "item_id": f"i{j}",
                    "genre": genres,
                    "rating": 1 + (k * j) % 5,
                }
            )
    return pd.DataFrame(rows)


def make_ranking_schema(**overrides: object) -> DatasetSchema:
    values: dict[str, object] = {
        "task": Task.RANKING,
        "fields": [
            FieldSpec(name="user_id", side=FieldSide.USER),
            FieldSpec(name="age", side=FieldSide.USER),
            FieldSpec(name="item_id", side=FieldSide.ITEM),
            FieldSpec(name="genre", side=FieldSide.ITEM, max_multiplicity=2),
        ],
        "user_column": "user_id",
        "item_column": "item_id",
        "val_size": 4,
        "test_size": 4,
    }
    values.update(overrides)
    return DatasetSchema.model_validate(values)


@pytest.fixture
def ranking_frame() -> pd.DataFrame:
    return make_ranking_frame()


@pytest.fixture
def ranking_schema() -> DatasetSchema:
    return make_ranking_schema()


@pytest.fixture
def ranking_bundle() -> DatasetBundle:
    return build_bundle(make_ranking_frame(), make_ranking_schema(), PreprocessOptions(min_freq=0), seed=7)


@pytest.fixture
def ctr_bundle() -> DatasetBundle:
    spec = SyntheticSpec(n_fields=4, cardinality=5, n_instances=400, dim=3, signal=2.0)
    return generate_synthetic(spec, seed=3)


RANKING_SCHEMA_TOML = """\
task = "ranking"
user_column = "user_id"
item_column = "item_id"
val_size = 4
test_size = 4

[[fields]]
name = "user_id"
side = "user"

[[fields]]
name = "age"
side = "user"

[[fields]]
name = "item_id"
side = "item"

[[fields]]
name = "genre"
side = "item"
max_multiplicity = 2
"""


@pytest.fixture
def ranking_files(tmp_path: Path) -> tuple[Path, Path]:
    """Schema file and raw CSV of the ranking frame, as (schema, raw)."""
    schema_path = tmp_path / "schema.toml"
    schema_path.write_text(RANKING_SCHEMA_TOML, encoding="utf-8")
    raw_path = tmp_path / "ratings.csv"
    make_ranking_frame().to_csv(raw_path, index=False)
    return schema_path, raw_path
