"""Raw delimited file to processed dataset.

Stages, in order:

1. read the raw file and check it against the schema,
2. keep positive rows (ranking) or parse labels (CTR),
3. deduplicate and k-core filter user-item pairs (ranking),
4. split rows into train/validation/test,
5. count tokens on the training rows and build the vocabulary,
6. encode every row into padded, aligned feature slots,
7. build user and item tables and the dataset statistics.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from lorentzfm.data.bundle import DatasetBundle, DatasetStats, EntityTable
from lorentzfm.data.instances import InstanceBatch, pad_multivalued
from lorentzfm.data.kcore import k_core_filter
from lorentzfm.data.schema import DatasetSchema, FieldSide, FieldSpec, SchemaError, Task
from lorentzfm.data.splits import make_splits
from lorentzfm.data.vocab import Vocabulary
from lorentzfm.errors import DataError

logger = logging.getLogger(__name__)

_USER = "__user__"
_ITEM = "__item__"
_LINE = "__line__"


class PreprocessOptions(BaseModel):
    """Knobs of the preprocessing run.

    Attributes:
        min_freq: Tokens seen fewer times in training fold into unknown.
        k_user: Minimum interactions per user kept by the k-core filter.
        k_item: Minimum interactions per item kept by the k-core filter.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    min_freq: int = Field(default=5, ge=0)
    k_user: int = Field(default=1, ge=1)
    k_item: int = Field(default=1, ge=1)


def read_raw(path: str | Path, schema: DatasetSchema) -> pd.DataFrame:
    """Read a delimited file with a header row.

    Raises:
        DataError: If the file is unreadable or ragged.
        SchemaError: If a column the schema names is absent.
    """
    try:
        frame = pd.read_csv(path, sep=schema.delimiter)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read raw data {path}: {exc}") from exc

    required = [f.source for f in schema.fields]
    required += [c for c in (schema.user_column, schema.item_column, schema.label_column) if c]
    missing = sorted(set(required) - set(frame.columns))
    if missing:
        raise SchemaError(f"{path}: columns named by the schema are missing: {', '.join(missing)}")
    frame[_LINE] = np.arange(len(frame)) + 2
    logger.info("Read %d rows from %s", len(frame), path)
    return frame


def _select_positives(frame: pd.DataFrame, schema: DatasetSchema) -> pd.DataFrame:
    if not schema.positive_filter:
        return frame
    try:
        kept = frame.query(schema.positive_filter)
    except Exception as exc:  # pandas raises assorted types for bad expressions
        raise SchemaError(f"invalid positive_filter {schema.positive_filter!r}: {exc}") from exc
    logger.info("Positive filter %r kept %d of %d rows", schema.positive_filter, len(kept), len(frame))
    return kept


def _parse_labels(frame: pd.DataFrame, column: str) -> npt.NDArray[np.float64]:
    numeric = pd.to_numeric(frame[column], errors="coerce")
    bad = numeric.isna()
    if bool(bad.any()):
        line_numbers = frame.loc[bad, _LINE] if _LINE in frame.columns else frame.index[bad] + 2
        lines = ", ".join(str(n) for n in list(line_numbers)[:5])
        raise DataError(f"non-numeric values in label column {column!r} at lines {lines}")
    return (numeric.to_numpy() > 0).astype(np.float64)


def _tokenize(series: pd.Series, spec: FieldSpec, multi_delimiter: str) -> list[list[str]]:
    text = series.astype("string").fillna("")
    if spec.max_multiplicity == 1:
        return [[t] if t else [] for t in text]
    return [[tok for tok in t.split(multi_delimiter) if tok] for t in text]


def _count_training_tokens(
    tokens: dict[str, list[list[str]]], train_rows: npt.NDArray[np.int64]
) -> dict[str, dict[str, int]]:
    counts: dict[str, dict[str, int]] = {}
    for name, per_row in tokens.items():
        exploded = pd.Series([per_row[r] for r in train_rows], dtype=object).explode().dropna()
        counts[name] = {str(k): int(v) for k, v in exploded.value_counts().items()}
    return counts


def encode_rows(
    tokens: dict[str, list[list[str]]], schema: DatasetSchema, vocabulary: Vocabulary
) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.bool_]]:
    """Padded feature indices and padding mask for every row."""
    n_rows = len(next(iter(tokens.values()))) if tokens else 0
    indices = np.zeros((n_rows, schema.width), dtype=np.int64)
    padded = np.zeros((n_rows, schema.width), dtype=bool)
    offset = 0
    for spec in schema.fields:
        unknown = vocabulary.unknown_index[spec.name]
        span = slice(offset, offset + spec.max_multiplicity)
        for row, row_tokens in enumerate(tokens[spec.name]):
            encoded = [vocabulary.lookup(spec.name, t) for t in row_tokens]
            slots, mask = pad_multivalued(encoded, spec.max_multiplicity, unknown)
            indices[row, span] = slots
            padded[row, span] = mask
        offset += spec.max_multiplicity
    return indices, padded


def _entity_table(
    keys: pd.Series,
    ids: list[str],
    indices: npt.NDArray[np.int64],
    padded: npt.NDArray[np.bool_],
    positions: list[int],
) -> EntityTable:
    first_row = pd.Series(np.arange(len(keys)), index=keys.to_numpy()).groupby(level=0).first()
    rows = first_row.loc[ids].to_numpy()
    return EntityTable(
        ids=ids,
        slots=indices[np.ix_(rows, positions)],
        padded=padded[np.ix_(rows, positions)],
    )


def build_bundle(
    frame: pd.DataFrame,
    schema: DatasetSchema,
    options: PreprocessOptions,
    seed: int,
    extra_meta: dict[str, Any] | None = None,
) -> DatasetBundle:
    """Run every stage after reading on an in-memory frame.

    Raises:
        DataError: If no samples survive filtering.
        SplitSizeError: If the split sizes do not fit the data.
    """
    frame = frame.drop(columns=[c for c in schema.drop_columns if c in frame.columns])
    ranking = schema.task is Task.RANKING

    if ranking:
        assert schema.user_column is not None and schema.item_column is not None
        frame = _select_positives(frame, schema).copy()
        frame[_USER] = frame[schema.user_column].astype("string").fillna("")
        frame[_ITEM] = frame[schema.item_column].astype("string").fillna("")
        frame = k_core_filter(frame, options.k_user, options.k_item, user_col=_USER, item_col=_ITEM)
    else:
        frame = frame.reset_index(drop=True)
    if frame.empty:
        raise DataError("no samples left after filtering")

    if ranking:
        labels = np.ones(len(frame))
    else:
        assert schema.label_column is not None
        labels = _parse_labels(frame, schema.label_column)

    val_size, test_size = schema.split_sizes()
    splits = make_splits(len(frame), val_size, test_size, seed)
    logger.info("Splits: train=%d val=%d test=%d", *splits.sizes())

    tokens = {
        spec.name: _tokenize(frame[spec.source], spec, schema.multi_delimiter) for spec in schema.fields
    }
    vocabulary = Vocabulary.from_counts(
        _count_training_tokens(tokens, splits.train), options.min_freq, schema.field_names
    )
    indices, padded = encode_rows(tokens, schema, vocabulary)

    user_positions = schema.slot_positions(FieldSide.USER)
    item_positions = schema.slot_positions(FieldSide.ITEM)
    if ranking:
        user_ids = sorted(frame[_USER].unique().tolist())
        item_ids = sorted(frame[_ITEM].unique().tolist())
        users = _entity_table(frame[_USER], user_ids, indices, padded, user_positions)
        items = _entity_table(frame[_ITEM], item_ids, indices, padded, item_positions)
        user_of_row = pd.Index(user_ids).get_indexer(frame[_USER]).astype(np.int64)
        item_of_row = pd.Index(item_ids).get_indexer(frame[_ITEM]).astype(np.int64)
        # entity-side slots always come from the entity tables
        indices[:, user_positions] = users.slots[user_of_row]
        padded[:, user_positions] = users.padded[user_of_row]
        indices[:, item_positions] = items.slots[item_of_row]
        padded[:, item_positions] = items.padded[item_of_row]
    else:
        users = EntityTable.empty(len(user_positions))
        items = EntityTable.empty(len(item_positions))
        user_of_row = np.full(len(frame), -1, dtype=np.int64)
        item_of_row = np.full(len(frame), -1, dtype=np.int64)

    full = InstanceBatch(
        indices=indices,
        values=np.ones(indices.shape),
        labels=labels,
        padded=padded,
        users=user_of_row,
        items=item_of_row,
    )
    n_users = len(users) if ranking else None
    n_items = len(items) if ranking else None
    stats = DatasetStats(
        samples=len(frame),
        user_fields=schema.count_side(FieldSide.USER),
        item_fields=schema.count_side(FieldSide.ITEM),
        fields=len(schema.fields),
        users=n_users,
        items=n_items,
        features=vocabulary.size,
        sparsity=1.0 - len(frame) / (n_users * n_items) if n_users and n_items else None,
    )
    meta: dict[str, Any] = {
        "task": schema.task.value,
        "seed": seed,
        "min_freq": options.min_freq,
        "k_user": options.k_user,
        "k_item": options.k_item,
        "val_size": val_size,
        "test_size": test_size,
    }
    meta.update(extra_meta or {})
    return DatasetBundle(
        schema=schema,
        vocabulary=vocabulary,
        train=full.take(splits.train),
        val=full.take(splits.val),
        test=full.take(splits.test),
        users=users,
        items=items,
        stats=stats,
        meta=meta,
    )


def preprocess(
    schema: DatasetSchema,
    raw_path: str | Path,
    out_dir: str | Path,
    options: PreprocessOptions,
    seed: int,
) -> DatasetBundle:
    """Read ``raw_path``, build the bundle and write it to ``out_dir``."""
    frame = read_raw(raw_path, schema)
    bundle = build_bundle(frame, schema, options, seed)
    bundle.save(out_dir)
    return bundle
