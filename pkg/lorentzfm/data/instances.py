"""Sparse instances and their aligned batch form.

A SparseInstance is the readable per-sample view: an ordered list of
``(field, feature index, value)`` entries plus a binary label. Training
and evaluation work on InstanceBatch, the same data stacked into
fixed-width arrays; every instance of a dataset has the same number of
slots because multi-valued fields are padded to their multiplicity.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TypeVar

import numpy as np
import numpy.typing as npt

from lorentzfm.errors import DataError

T = TypeVar("T")


class InstanceError(DataError):
    """Raised when instances are malformed or misaligned."""

    pass


@dataclass(frozen=True)
class FeatureEntry:
    """One active feature of a sparse instance.

    Attributes:
        field: Name of the field this slot belongs to.
        index: Global feature index in the vocabulary.
        value: Feature value x_i (1.0 for categorical one-hot).
        padded: Whether the slot holds a padding "unknown" feature.
    """

    field: str
    index: int
    value: float = 1.0
    padded: bool = False


@dataclass
class SparseInstance:
    """A labelled sparse feature vector.

    Attributes:
        entries: Ordered feature entries, one or more per field.
        label: Binary target (1 positive, 0 negative).
    """

    entries: list[FeatureEntry]
    label: int = 0

    @property
    def indices(self) -> npt.NDArray[np.int64]:
        """Feature indices in slot order."""
        return np.array([e.index for e in self.entries], dtype=np.int64)

    @property
    def values(self) -> npt.NDArray[np.float64]:
        """Feature values in slot order."""
        return np.array([e.value for e in self.entries], dtype=np.float64)

    @property
    def fields(self) -> list[str]:
        """Field name of each slot."""
        return [e.field for e in self.entries]


@dataclass
class InstanceBatch:
    """Aligned arrays for a set of instances sharing one slot layout.

    Attributes:
        indices: (N, m) feature indices.
        values: (N, m) feature values.
        labels: (N,) binary labels as floats.
        padded: (N, m) mask of padding slots.
        users: (N,) user ids for ranking data, -1 when not applicable.
        items: (N,) item ids for ranking data, -1 when not applicable.
    """

    indices: npt.NDArray[np.int64]
    values: npt.NDArray[np.float64]
    labels: npt.NDArray[np.float64]
    padded: npt.NDArray[np.bool_] = field(default=None)  # type: ignore[assignment]
    users: npt.NDArray[np.int64] = field(default=None)  # type: ignore[assignment]
    items: npt.NDArray[np.int64] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.indices.ndim != 2 or self.values.shape != self.indices.shape:
            raise InstanceError(
                f"indices {self.indices.shape} and values {self.values.shape} must be equal 2-D shapes"
            )
        n = self.indices.shape[0]
        if self.labels.shape != (n,):
            raise InstanceError(f"labels must have shape ({n},), got {self.labels.shape}")
        if self.padded is None:
            self.padded = np.zeros(self.indices.shape, dtype=bool)
        self.padded = np.asarray(self.padded, dtype=bool)
        if self.users is None:
            self.users = np.full(n, -1, dtype=np.int64)
        if self.items is None:
            self.items = np.full(n, -1, dtype=np.int64)
        self.users = np.asarray(self.users, dtype=np.int64)
        self.items = np.asarray(self.items, dtype=np.int64)

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    @property
    def width(self) -> int:
        """Number of slots per instance."""
        return int(self.indices.shape[1])

    def take(self, rows: npt.ArrayLike) -> InstanceBatch:
        """Select a subset of instances by position."""
        sel = np.asarray(rows, dtype=np.int64)
        return InstanceBatch(
            indices=self.indices[sel],
            values=self.values[sel],
            labels=self.labels[sel],
            padded=self.padded[sel],
            users=self.users[sel],
            items=self.items[sel],
        )

    def effective_values(self, exclude_padding: bool) -> npt.NDArray[np.float64]:
        """Values with padding slots zeroed when ``exclude_padding`` is set."""
        if not exclude_padding:
            return self.values
        return np.where(self.padded, 0.0, self.values)

    def instance(self, row: int, slot_fields: Sequence[str]) -> SparseInstance:
        """Materialize one row as a SparseInstance."""
        entries = [
            FeatureEntry(
                field=slot_fields[j],
                index=int(self.indices[row, j]),
                value=float(self.values[row, j]),
                padded=bool(self.padded[row, j]),
            )
            for j in range(self.width)
        ]
        return SparseInstance(entries=entries, label=int(self.labels[row]))

    @classmethod
    def from_instances(cls, instances: Sequence[SparseInstance]) -> InstanceBatch:
        """Stack instances that share a slot count.

        Raises:
            InstanceError: If the list is empty or widths differ.
        """
        if not instances:
            raise InstanceError("cannot build a batch from zero instances")
        width = len(instances[0].entries)
        if any(len(inst.entries) != width for inst in instances):
            raise InstanceError("instances are not aligned to a common slot count")
        return cls(
            indices=np.stack([inst.indices for inst in instances]),
            values=np.stack([inst.values for inst in instances]),
            labels=np.array([inst.label for inst in instances], dtype=np.float64),
            padded=np.array([[e.padded for e in inst.entries] for inst in instances]),
        )

    @classmethod
    def concat(cls, batches: Sequence[InstanceBatch]) -> InstanceBatch:
        """Concatenate batches row-wise."""
        if not batches:
            raise InstanceError("cannot concatenate zero batches")
        return cls(
            indices=np.concatenate([b.indices for b in batches]),
            values=np.concatenate([b.values for b in batches]),
            labels=np.concatenate([b.labels for b in batches]),
            padded=np.concatenate([b.padded for b in batches]),
            users=np.concatenate([b.users for b in batches]),
            items=np.concatenate([b.items for b in batches]),
        )


def pad_multivalued(
    values: Sequence[T], max_multiplicity: int, unknown: T
) -> tuple[list[T], list[bool]]:
    """Align a multi-valued field to exactly ``max_multiplicity`` slots.

    Over-long inputs keep their first ``max_multiplicity`` values in input
    order; short inputs are filled with the field's unknown entry.

    Args:
        values: The field's tokens or feature indices, in input order.
        max_multiplicity: Slot count declared for the field.
        unknown: The field's unknown token or index.

    Returns:
        ``(indices, padded_mask)`` both of length ``max_multiplicity``.
    """
    if max_multiplicity < 1:
        raise InstanceError(f"max_multiplicity must be >= 1, got {max_multiplicity}")
    kept = list(values[:max_multiplicity])
    fill = max_multiplicity - len(kept)
    return kept + [unknown] * fill, [False] * len(kept) + [True] * fill
