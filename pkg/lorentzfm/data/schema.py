"""Dataset schema files.

A schema declares the fields of a raw delimited file, which side (user,
item or context) each belongs to, how many values a multi-valued field
may carry, and the task-specific columns. Schemas are TOML or JSON
documents validated with pydantic.

Example (TOML)::

    task = "ranking"
    delimiter = ","
    multi_delimiter = "|"
    user_column = "user_id"
    item_column = "item_id"
    positive_filter = "rating > 3"

    [[fields]]
    name = "user_id"
    side = "user"

    [[fields]]
    name = "genre"
    side = "item"
    max_multiplicity = 3
"""

from __future__ import annotations

import json
import sys
from enum import Enum
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from lorentzfm.errors import ConfigError


class SchemaError(ConfigError):
    """Raised when a schema file is unreadable or inconsistent."""

    pass


class Task(str, Enum):
    """Prediction task a dataset is prepared for."""

    RANKING = "ranking"
    CTR = "ctr"


class FieldSide(str, Enum):
    """Which entity a field describes."""

    USER = "user"
    ITEM = "item"
    CONTEXT = "context"


class FieldSpec(BaseModel):
    """One declared field.

    Attributes:
        name: Field name, unique within the schema.
        side: user, item or context.
        max_multiplicity: Slots reserved for the field; values beyond it
            are truncated, missing ones padded with the unknown feature.
        column: Raw column holding the field (defaults to ``name``).
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field(..., min_length=1)
    side: FieldSide = Field(default=FieldSide.CONTEXT)
    max_multiplicity: int = Field(default=1, ge=1)
    column: str | None = Field(default=None)

    @property
    def source(self) -> str:
        """Raw column name the field is read from."""
        return self.column or self.name


class DatasetSchema(BaseModel):
    """Validated description of a raw dataset."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    task: Task
    fields: list[FieldSpec] = Field(..., min_length=1)
    delimiter: str = Field(default=",", min_length=1)
    multi_delimiter: str = Field(default="|", min_length=1)
    user_column: str | None = None
    item_column: str | None = None
    label_column: str | None = None
    positive_filter: str | None = Field(
        default=None,
        description="pandas query expression selecting positive rows (ranking)",
    )
    drop_columns: list[str] = Field(default_factory=list)
    val_size: int | float | None = Field(
        default=None, description="validation count or fraction; 10000 (ranking) or 0.1 (ctr)"
    )
    test_size: int | float | None = Field(
        default=None, description="test count or fraction; 10000 (ranking) or 0.1 (ctr)"
    )

    @field_validator("fields")
    @classmethod
    def validate_unique_names(cls, v: list[FieldSpec]) -> list[FieldSpec]:
        """Field names must be unique."""
        names = [f.name for f in v]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate field names: {', '.join(duplicates)}")
        return v

    @model_validator(mode="after")
    def validate_task_columns(self) -> DatasetSchema:
        """Ranking needs user/item columns and an item field; CTR needs a label."""
        if self.task is Task.RANKING:
            if not self.user_column or not self.item_column:
                raise ValueError("ranking schemas must set user_column and item_column")
            if not any(f.side is FieldSide.ITEM for f in self.fields):
                raise ValueError("ranking schemas need at least one item-side field")
        else:
            if not self.label_column:
                raise ValueError("ctr schemas must set label_column")
            if self.positive_filter:
                raise ValueError("positive_filter only applies to ranking schemas")
        return self

    def split_sizes(self) -> tuple[int | float, int | float]:
        """Validation and test sizes with the task defaults filled in."""
        default: int | float = 10_000 if self.task is Task.RANKING else 0.1
        return (
            default if self.val_size is None else self.val_size,
            default if self.test_size is None else self.test_size,
        )

    @property
    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]

    @property
    def slot_fields(self) -> list[str]:
        """Field name of every slot, each field repeated by its multiplicity."""
        return [f.name for f in self.fields for _ in range(f.max_multiplicity)]

    @property
    def width(self) -> int:
        """Total slot count of an instance."""
        return sum(f.max_multiplicity for f in self.fields)

    def slot_positions(self, side: FieldSide) -> list[int]:
        """Slot positions occupied by fields of ``side``."""
        positions: list[int] = []
        offset = 0
        for f in self.fields:
            if f.side is side:
                positions.extend(range(offset, offset + f.max_multiplicity))
            offset += f.max_multiplicity
        return positions

    def count_side(self, side: FieldSide) -> int:
        return sum(1 for f in self.fields if f.side is side)


def _read_document(path: Path) -> dict[str, Any]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise SchemaError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{path} must contain a table/object at top level")
    return data


def load_document(path: str | Path) -> dict[str, Any]:
    """Parse a TOML (default) or JSON (``.json`` suffix) config document."""
    return _read_document(Path(path))


def load_schema(path: str | Path) -> DatasetSchema:
    """Load and validate a dataset schema file.

    Raises:
        SchemaError: If the file cannot be read, parsed or validated.
    """
    data = load_document(path)
    try:
        return DatasetSchema.model_validate(data)
    except ValidationError as exc:
        raise SchemaError(f"invalid schema {path}: {exc}") from exc
