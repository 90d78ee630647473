"""Feature vocabulary with rare-token folding.

Every field owns one "unknown" feature. Tokens seen fewer than
``min_freq`` times in the training portion fold into it, as do tokens
first met at evaluation or explain time. Within a field the unknown
index comes first and surviving tokens follow in sorted order, so the
layout depends only on the counted data.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from lorentzfm.errors import DataError

logger = logging.getLogger(__name__)

UNKNOWN_TOKEN = "<unk>"


class EmptyVocabularyError(DataError):
    """Raised when a vocabulary would be built from no records."""

    pass


@dataclass
class Vocabulary:
    """Bijection between ``(field, token)`` pairs and ``[0, |V|)``.

    Attributes:
        fields: Field names in layout order.
        token_to_index: Surviving ``(field, token)`` pairs to feature index.
        unknown_index: Unknown feature index of each field.
    """

    fields: list[str]
    token_to_index: dict[tuple[str, str], int]
    unknown_index: dict[str, int]
    _entries: list[tuple[str, str]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if not self._entries:
            entries: list[tuple[str, str] | None] = [None] * self.size
            for name, idx in self.unknown_index.items():
                entries[idx] = (name, UNKNOWN_TOKEN)
            for key, idx in self.token_to_index.items():
                entries[idx] = key
            if any(e is None for e in entries):
                raise DataError("vocabulary indices are not dense")
            self._entries = [e for e in entries if e is not None]

    @property
    def size(self) -> int:
        """Total number of features |V|."""
        return len(self.token_to_index) + len(self.unknown_index)

    def __len__(self) -> int:
        return self.size

    def lookup(self, field_name: str, token: str) -> int:
        """Feature index of ``token``, or the field's unknown index.

        Raises:
            DataError: If the field is not part of the vocabulary.
        """
        try:
            unknown = self.unknown_index[field_name]
        except KeyError as exc:
            raise DataError(f"field {field_name!r} is not in the vocabulary") from exc
        return self.token_to_index.get((field_name, token), unknown)

    def contains(self, field_name: str, token: str) -> bool:
        """Whether ``token`` has its own (non-unknown) index in ``field_name``."""
        return (field_name, token) in self.token_to_index

    def entry(self, index: int) -> tuple[str, str]:
        """``(field, token)`` for a feature index; unknowns use ``<unk>``."""
        return self._entries[index]

    def label(self, index: int) -> str:
        """Human-readable ``field=token`` label for a feature index."""
        name, token = self._entries[index]
        return f"{name}={token}"

    def field_sizes(self) -> dict[str, int]:
        """Number of features per field, unknown included."""
        sizes = Counter(name for name, _ in self._entries)
        return {name: sizes[name] for name in self.fields}

    @classmethod
    def from_counts(
        cls, counts: Mapping[str, Mapping[str, int]], min_freq: int, fields: Sequence[str]
    ) -> Vocabulary:
        """Lay out a vocabulary from per-field token counts.

        Args:
            counts: field -> token -> occurrence count.
            min_freq: Tokens counted fewer times fold into the unknown entry.
            fields: Field order of the layout; fields without counts still
                get an unknown entry.
        """
        token_to_index: dict[tuple[str, str], int] = {}
        unknown_index: dict[str, int] = {}
        folded = 0
        next_index = 0
        for name in fields:
            unknown_index[name] = next_index
            next_index += 1
            field_counts = counts.get(name, {})
            for token in sorted(field_counts):
                if token == UNKNOWN_TOKEN or field_counts[token] < min_freq:
                    folded += 1
                    continue
                token_to_index[(name, token)] = next_index
                next_index += 1
        logger.info(
            "Vocabulary built: %d features over %d fields (%d tokens folded, min_freq=%d)",
            next_index,
            len(fields),
            folded,
            min_freq,
        )
        return cls(fields=list(fields), token_to_index=token_to_index, unknown_index=unknown_index)

    def save(self, path: str | Path) -> None:
        """Write ``field``/``token``/``index`` triples as TSV."""
        frame = pd.DataFrame(
            [(name, token, idx) for idx, (name, token) in enumerate(self._entries)],
            columns=["field", "token", "index"],
        )
        frame.to_csv(path, sep="\t", index=False, lineterminator="\n")

    @classmethod
    def load(cls, path: str | Path) -> Vocabulary:
        """Read a vocabulary written by :meth:`save`.

        Raises:
            DataError: If the file is missing or not a dense triple table.
        """
        try:
            frame = pd.read_csv(path, sep="\t", dtype=str, keep_default_na=False)
        except (OSError, pd.errors.ParserError) as exc:
            raise DataError(f"cannot read vocabulary {path}: {exc}") from exc
        if list(frame.columns) != ["field", "token", "index"]:
            raise DataError(f"{path} is not a vocabulary file")

        fields: list[str] = []
        token_to_index: dict[tuple[str, str], int] = {}
        unknown_index: dict[str, int] = {}
        for name, token, raw_index in frame.itertuples(index=False, name=None):
            idx = int(raw_index)
            if name not in unknown_index and token != UNKNOWN_TOKEN:
                raise DataError(f"{path}: field {name!r} does not start with its unknown entry")
            if token == UNKNOWN_TOKEN:
                fields.append(name)
                unknown_index[name] = idx
            else:
                token_to_index[(name, token)] = idx
        return cls(fields=fields, token_to_index=token_to_index, unknown_index=unknown_index)


def count_tokens(
    records: Iterable[Mapping[str, str | Sequence[str]]],
) -> tuple[dict[str, Counter[str]], list[str]]:
    """Count tokens per field, returning the counts and first-seen field order."""
    counts: dict[str, Counter[str]] = {}
    order: list[str] = []
    for record in records:
        for name, tokens in record.items():
            if name not in counts:
                counts[name] = Counter()
                order.append(name)
            if isinstance(tokens, str):
                counts[name][tokens] += 1
            else:
                counts[name].update(tokens)
    return counts, order


def build_vocab(
    records: Iterable[Mapping[str, str | Sequence[str]]],
    min_freq: int,
    fields: Sequence[str] | None = None,
) -> Vocabulary:
    """Build a vocabulary from tokenized training records.

    Args:
        records: One mapping per training record, field -> token or list
            of tokens for multi-valued fields.
        min_freq: Minimum count for a token to keep its own index.
        fields: Field layout order; defaults to first-seen order.

    Raises:
        EmptyVocabularyError: If ``records`` is empty.
    """
    counts, order = count_tokens(records)
    if not order:
        raise EmptyVocabularyError("cannot build a vocabulary from zero records")
    return Vocabulary.from_counts(counts, min_freq, fields if fields is not None else order)
