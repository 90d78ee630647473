"""Checkpoint container for model parameters and optimizer state.

Layout::

    b"LFM1" | uint32 LE header length | JSON header | array payload

The header records the model kind, |V|, k, seed, free-form metadata and
the name and shape of every array; the payload is the arrays in header
order as little-endian float64, row-major. Reading back is bit-exact.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from lorentzfm.errors import DataError
from lorentzfm.models.base import FloatArray, InteractionModel, ModelKind
from lorentzfm.models.fm import FactorizationMachine
from lorentzfm.models.lorentz_fm import LorentzFM

logger = logging.getLogger(__name__)

MAGIC = b"LFM1"
_DTYPE = np.dtype("<f8")
_OPTIM_PREFIX = "optim/"


class CheckpointFormatError(DataError):
    """Raised when a checkpoint file is truncated or not a LorentzFM container."""

    pass


@dataclass
class Checkpoint:
    """In-memory checkpoint contents.

    Attributes:
        kind: Model family.
        count: Number of features |V|.
        dim: Embedding size k.
        seed: Seed the model was initialized with.
        arrays: Model parameter arrays by name.
        optimizer: Optimizer state arrays by name (empty for RSGD).
        metadata: JSON-serializable run information (epoch, task, config digest...).
    """

    kind: ModelKind
    count: int
    dim: int
    seed: int
    arrays: dict[str, FloatArray]
    optimizer: dict[str, FloatArray] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_model(
        cls,
        model: InteractionModel,
        seed: int,
        optimizer: dict[str, FloatArray] | None = None,
        metadata: dict[str, Any] | None = None,
    ) -> Checkpoint:
        """Snapshot a model (arrays are copied)."""
        return cls(
            kind=model.kind,
            count=model.count,
            dim=model.dim,
            seed=seed,
            arrays={k: np.array(v, copy=True) for k, v in model.state_arrays().items()},
            optimizer={k: np.array(v, copy=True) for k, v in (optimizer or {}).items()},
            metadata=dict(metadata or {}),
        )

    def to_model(self) -> InteractionModel:
        """Rebuild the model the checkpoint was taken from."""
        arrays = {k: np.array(v, copy=True) for k, v in self.arrays.items()}
        if self.kind is ModelKind.LORENTZ_FM:
            return LorentzFM.from_state_arrays(arrays)
        return FactorizationMachine.from_state_arrays(arrays)


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> None:
    """Write ``ckpt`` to ``path`` in the LFM1 container format."""
    named = list(ckpt.arrays.items()) + [
        (_OPTIM_PREFIX + k, v) for k, v in ckpt.optimizer.items()
    ]
    header = {
        "model": ckpt.kind.value,
        "count": ckpt.count,
        "dim": ckpt.dim,
        "seed": ckpt.seed,
        "arrays": [{"name": name, "shape": list(np.shape(arr))} for name, arr in named],
        "metadata": ckpt.metadata,
    }
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(encoded)))
        fh.write(encoded)
        for _, arr in named:
            fh.write(np.ascontiguousarray(arr, dtype=_DTYPE).tobytes(order="C"))
    logger.debug("Checkpoint written to %s (%d arrays)", target, len(named))


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        CheckpointFormatError: On a bad magic string, a malformed header,
            or a payload whose size does not match the header.
        DataError: If the file cannot be read.
    """
    source = Path(path)
    try:
        raw = source.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read checkpoint {source}: {exc}") from exc

    if raw[:4] != MAGIC:
        raise CheckpointFormatError(f"{source} is not a LorentzFM checkpoint (bad magic)")
    if len(raw) < 8:
        raise CheckpointFormatError(f"{source} is truncated")
    (header_len,) = struct.unpack("<I", raw[4:8])
    try:
        header = json.loads(raw[8 : 8 + header_len].decode("utf-8"))
        kind = ModelKind(header["model"])
    except (ValueError, KeyError) as exc:
        raise CheckpointFormatError(f"{source} has a malformed header: {exc}") from exc

    offset = 8 + header_len
    arrays: dict[str, FloatArray] = {}
    optimizer: dict[str, FloatArray] = {}
    for spec in header["arrays"]:
        shape = tuple(int(s) for s in spec["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * _DTYPE.itemsize
        chunk = raw[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointFormatError(f"{source} payload ends inside array {spec['name']!r}")
        arr = np.frombuffer(chunk, dtype=_DTYPE).reshape(shape).astype(np.float64)
        offset += nbytes
        name = str(spec["name"])
        if name.startswith(_OPTIM_PREFIX):
            optimizer[name[len(_OPTIM_PREFIX) :]] = arr
        else:
            arrays[name] = arr
    if offset != len(raw):
        raise CheckpointFormatError(f"{source} has {len(raw) - offset} trailing bytes")

    return Checkpoint(
        kind=kind,
        count=int(header["count"]),
        dim=int(header["dim"]),
        seed=int(header["seed"]),
        arrays=arrays,
        optimizer=optimizer,
        metadata=dict(header.get("metadata", {})),
    )
