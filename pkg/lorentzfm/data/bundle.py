"""Processed dataset container.

A DatasetBundle holds everything training and evaluation need: the
schema, the vocabulary, the three splits as aligned instance batches,
and for ranking data the user and item tables used to build negative
and candidate instances. It is written to a directory of plain-text
files::

    schema.json   validated schema
    vocab.tsv     field / token / index triples
    train.txt     one instance per line
    val.txt       label \\t user \\t item \\t padmask \\t idx:val idx:val ...
    test.txt
    users.tsv     user id, user-side slot indices, padding mask
    items.tsv     item id, item-side slot indices, padding mask
    meta.json     preprocessing options and seed
    stats.json    dataset statistics
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
from pydantic import BaseModel, ConfigDict

from lorentzfm.data.instances import InstanceBatch
from lorentzfm.data.schema import DatasetSchema, FieldSide, Task
from lorentzfm.data.vocab import Vocabulary
from lorentzfm.errors import DataError

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")

IntArray = npt.NDArray[np.int64]
BoolArray = npt.NDArray[np.bool_]


class DatasetStats(BaseModel):
    """Dataset statistics in the layout of the usual dataset summary table.

    ``users``, ``items`` and ``sparsity`` are only defined for ranking
    data; sparsity is ``1 - samples / (users * items)``.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    samples: int
    user_fields: int
    item_fields: int
    fields: int
    users: int | None = None
    items: int | None = None
    features: int
    sparsity: float | None = None

    def to_text(self) -> str:
        """Aligned ``#Name  value`` lines."""
        rows = [
            ("#Samples", self.samples),
            ("#User Fields", self.user_fields),
            ("#Item Fields", self.item_fields),
            ("#Fields", self.fields),
            ("#Users", "-" if self.users is None else self.users),
            ("#Items", "-" if self.items is None else self.items),
            ("#Features", self.features),
            ("Sparsity", "-" if self.sparsity is None else f"{100.0 * self.sparsity:.2f}%"),
        ]
        return "\n".join(f"{name:<14}{value}" for name, value in rows)


@dataclass
class EntityTable:
    """Side-specific slot indices of every user or item.

    Attributes:
        ids: Raw id of each entity; position is the entity's integer id.
        slots: (n, w) feature indices for the side's slot positions.
        padded: (n, w) padding mask of those slots.
    """

    ids: list[str]
    slots: IntArray
    padded: BoolArray

    def __post_init__(self) -> None:
        self.slots = np.asarray(self.slots, dtype=np.int64)
        self.padded = np.asarray(self.padded, dtype=bool)
        if self.slots.ndim != 2 or self.slots.shape[0] != len(self.ids):
            raise DataError(f"entity table of {len(self.ids)} ids has slot shape {self.slots.shape}")
        if self.padded.shape != self.slots.shape:
            raise DataError("entity padding mask does not match its slots")

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def empty(cls, width: int) -> EntityTable:
        return cls(ids=[], slots=np.zeros((0, width), dtype=np.int64), padded=np.zeros((0, width), dtype=bool))

    def position(self, raw_id: str) -> int:
        """Integer id of a raw id.

        Raises:
            DataError: If the id is unknown.
        """
        try:
            return self.ids.index(raw_id)
        except ValueError as exc:
            raise DataError(f"unknown id {raw_id!r}") from exc

    def save(self, path: Path) -> None:
        frame = pd.DataFrame(
            {
                "id": self.ids,
                "slots": [" ".join(str(i) for i in row) for row in self.slots.tolist()],
                "padmask": ["".join("1" if p else "0" for p in row) for row in self.padded.tolist()],
            }
        )
        frame.to_csv(path, sep="\t", index=False, lineterminator="\n")

    @classmethod
    def load(cls, path: Path, width: int) -> EntityTable:
        frame = pd.read_csv(path, sep="\t", dtype=str, keep_default_na=False)
        if frame.empty:
            return cls.empty(width)
        slots = [[int(tok) for tok in cell.split()] for cell in frame["slots"]]
        padded = [[ch == "1" for ch in cell] for cell in frame["padmask"]]
        return cls(ids=list(frame["id"]), slots=np.array(slots), padded=np.array(padded))


def _format_batch(batch: InstanceBatch) -> Iterable[str]:
    for row in range(len(batch)):
        mask = "".join("1" if p else "0" for p in batch.padded[row])
        pairs = " ".join(
            f"{idx}:{val!r}"
            for idx, val in zip(batch.indices[row].tolist(), batch.values[row].tolist(), strict=True)
        )
        yield f"{int(batch.labels[row])}\t{batch.users[row]}\t{batch.items[row]}\t{mask}\t{pairs}\n"


def write_instances(path: Path, batch: InstanceBatch) -> None:
    """Write a batch in the line-per-instance text format."""
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(_format_batch(batch))


def read_instances(path: Path, width: int) -> InstanceBatch:
    """Read an instance file.

    Raises:
        DataError: With the offending line number on malformed input.
    """
    labels: list[int] = []
    users: list[int] = []
    items: list[int] = []
    padded: list[list[bool]] = []
    indices: list[list[int]] = []
    values: list[list[float]] = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        try:
            label, user, item, mask, body = line.split("\t")
            pairs = [tok.split(":") for tok in body.split()]
            if len(pairs) != width or len(mask) != width:
                raise ValueError(f"expected {width} slots, got {len(pairs)}")
            indices.append([int(i) for i, _ in pairs])
            values.append([float(v) for _, v in pairs])
            padded.append([ch == "1" for ch in mask])
            labels.append(int(label))
            users.append(int(user))
            items.append(int(item))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: malformed instance line: {exc}") from exc
    if not labels:
        return InstanceBatch(
            indices=np.zeros((0, width), dtype=np.int64),
            values=np.zeros((0, width)),
            labels=np.zeros(0),
        )
    return InstanceBatch(
        indices=np.array(indices),
        values=np.array(values),
        labels=np.array(labels, dtype=np.float64),
        padded=np.array(padded),
        users=np.array(users),
        items=np.array(items),
    )


@dataclass
class DatasetBundle:
    """Schema, vocabulary, splits and entity tables of one dataset.

    ``observed`` maps each user to every item it interacted with in any
    split. It is derived from the positive instances on construction.
    """

    schema: DatasetSchema
    vocabulary: Vocabulary
    train: InstanceBatch
    val: InstanceBatch
    test: InstanceBatch
    users: EntityTable
    items: EntityTable
    stats: DatasetStats
    meta: dict[str, Any] = field(default_factory=dict)
    observed: dict[int, set[int]] = field(init=False)

    def __post_init__(self) -> None:
        width = self.schema.width
        for name in SPLITS:
            batch = self.split(name)
            if batch.width != width:
                raise DataError(f"{name} split has {batch.width} slots, schema declares {width}")
            if len(batch) and (batch.indices.min() < 0 or batch.indices.max() >= self.vocabulary.size):
                raise DataError(f"{name} split has feature indices outside [0, {self.vocabulary.size})")
        self.observed = self.observed_in(SPLITS)

    @property
    def task(self) -> Task:
        return self.schema.task

    @property
    def slot_fields(self) -> list[str]:
        return self.schema.slot_fields

    @property
    def feature_count(self) -> int:
        return self.vocabulary.size

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def item_positions(self) -> IntArray:
        return np.array(self.schema.slot_positions(FieldSide.ITEM), dtype=np.int64)

    @property
    def user_positions(self) -> IntArray:
        return np.array(self.schema.slot_positions(FieldSide.USER), dtype=np.int64)

    def split(self, name: str) -> InstanceBatch:
        """The ``train``, ``val`` or ``test`` batch."""
        if name not in SPLITS:
            raise DataError(f"unknown split {name!r}; expected one of {', '.join(SPLITS)}")
        batch: InstanceBatch = getattr(self, name)
        return batch

    def observed_in(self, splits: Sequence[str]) -> dict[int, set[int]]:
        """Items each user has a positive interaction with in ``splits``."""
        observed: dict[int, set[int]] = {}
        for name in splits:
            batch = self.split(name)
            positive = (batch.labels > 0) & (batch.users >= 0) & (batch.items >= 0)
            for user, item in zip(batch.users[positive].tolist(), batch.items[positive].tolist(), strict=True):
                observed.setdefault(user, set()).add(item)
        return observed

    def with_items(self, batch: InstanceBatch, item_ids: npt.ArrayLike) -> InstanceBatch:
        """Copy of ``batch`` with its item-side slots replaced.

        Row ``r`` gets the item-side features of ``item_ids[r]``; user-side
        and context slots are kept. Labels are copied unchanged.

        Raises:
            DataError: If the bundle has no item table.
        """
        if self.n_items == 0:
            raise DataError("dataset has no item table; item substitution needs ranking data")
        ids = np.asarray(item_ids, dtype=np.int64)
        positions = self.item_positions
        indices = batch.indices.copy()
        values = batch.values.copy()
        padded = batch.padded.copy()
        indices[:, positions] = self.items.slots[ids]
        values[:, positions] = 1.0
        padded[:, positions] = self.items.padded[ids]
        return InstanceBatch(
            indices=indices,
            values=values,
            labels=batch.labels.copy(),
            padded=padded,
            users=batch.users.copy(),
            items=ids,
        )

    def compose(self, user: int, item: int) -> InstanceBatch:
        """One-row instance for a ``(user, item)`` pair.

        Context fields take their unknown feature.
        """
        width = self.schema.width
        indices = np.zeros((1, width), dtype=np.int64)
        padded = np.zeros((1, width), dtype=bool)
        offset = 0
        for spec in self.schema.fields:
            unknown = self.vocabulary.unknown_index[spec.name]
            indices[0, offset : offset + spec.max_multiplicity] = unknown
            offset += spec.max_multiplicity
        user_pos = self.user_positions
        indices[0, user_pos] = self.users.slots[user]
        padded[0, user_pos] = self.users.padded[user]
        base = InstanceBatch(
            indices=indices,
            values=np.ones((1, width)),
            labels=np.ones(1),
            padded=padded,
            users=np.array([user]),
        )
        return self.with_items(base, [item])

    def save(self, out_dir: str | Path) -> None:
        """Write the container files into ``out_dir``."""
        root = Path(out_dir)
        root.mkdir(parents=True, exist_ok=True)
        (root / "schema.json").write_text(self.schema.model_dump_json(indent=2) + "\n", encoding="utf-8")
        self.vocabulary.save(root / "vocab.tsv")
        for name in SPLITS:
            write_instances(root / f"{name}.txt", self.split(name))
        self.users.save(root / "users.tsv")
        self.items.save(root / "items.tsv")
        (root / "meta.json").write_text(json.dumps(self.meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        (root / "stats.json").write_text(self.stats.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info("Dataset written to %s (%s)", root, ", ".join(f"{n}={len(self.split(n))}" for n in SPLITS))

    @classmethod
    def load(cls, data_dir: str | Path) -> DatasetBundle:
        """Read a container written by :meth:`save`.

        Raises:
            DataError: If a file is missing or malformed.
        """
        root = Path(data_dir)
        if not (root / "schema.json").is_file():
            raise DataError(f"{root} is not a processed dataset directory (schema.json missing)")
        try:
            schema = DatasetSchema.model_validate_json((root / "schema.json").read_text(encoding="utf-8"))
            stats = DatasetStats.model_validate_json((root / "stats.json").read_text(encoding="utf-8"))
            meta = json.loads((root / "meta.json").read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read dataset metadata in {root}: {exc}") from exc
        vocabulary = Vocabulary.load(root / "vocab.tsv")
        width = schema.width
        splits = {name: read_instances(root / f"{name}.txt", width) for name in SPLITS}
        users = EntityTable.load(root / "users.tsv", len(schema.slot_positions(FieldSide.USER)))
        items = EntityTable.load(root / "items.tsv", len(schema.slot_positions(FieldSide.ITEM)))
        return cls(
            schema=schema,
            vocabulary=vocabulary,
            train=splits["train"],
            val=splits["val"],
            test=splits["test"],
            users=users,
            items=items,
            stats=stats,
            meta=meta,
        )
