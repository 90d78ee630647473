"""Dataset ingestion: schema, vocabulary, k-core, splits, sampling."""

from lorentzfm.data.bundle import DatasetBundle, DatasetStats, EntityTable
from lorentzfm.data.instances import (
    FeatureEntry,
    InstanceBatch,
    InstanceError,
    SparseInstance,
    pad_multivalued,
)
from lorentzfm.data.kcore import k_core_filter
from lorentzfm.data.pipeline import PreprocessOptions, build_bundle, preprocess, read_raw
from lorentzfm.data.sampling import NegativeSampler, NegativeSamplingError, sample_negatives
from lorentzfm.data.schema import (
    DatasetSchema,
    FieldSide,
    FieldSpec,
    SchemaError,
    Task,
    load_document,
    load_schema,
)
from lorentzfm.data.splits import Splits, SplitSizeError, make_splits, resolve_size
from lorentzfm.data.vocab import UNKNOWN_TOKEN, EmptyVocabularyError, Vocabulary, build_vocab

__all__ = [
    "UNKNOWN_TOKEN",
    "DatasetBundle",
    "DatasetSchema",
    "DatasetStats",
    "EmptyVocabularyError",
    "EntityTable",
    "FeatureEntry",
    "FieldSide",
    "FieldSpec",
    "InstanceBatch",
    "InstanceError",
    "NegativeSampler",
    "NegativeSamplingError",
    "PreprocessOptions",
    "SchemaError",
    "SparseInstance",
    "SplitSizeError",
    "Splits",
    "Task",
    "build_bundle",
    "build_vocab",
    "k_core_filter",
    "load_document",
    "load_schema",
    "make_splits",
    "pad_multivalued",
    "preprocess",
    "read_raw",
    "resolve_size",
    "sample_negatives",
]
