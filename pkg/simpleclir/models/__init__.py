"""Data models: corpus, embeddings, configuration and synthetic data."""

from simpleclir.models.config import (
    BASELINES,
    MODEL_VARIANTS,
    ExperimentConfig,
    InteractionKind,
    ModelConfig,
    ModelFamily,
    TrainConfig,
)
from simpleclir.models.corpus import (
    Collection,
    CollectionStats,
    Document,
    Qrels,
    Query,
    QuerySet,
    Vocabulary,
    compute_stats,
    load_collection,
    load_qrels,
    load_queries,
)
from simpleclir.models.embeddings import (
    EmbeddingTable,
    cosine,
    coverage_report,
    load_embeddings,
    nearest_neighbors,
)
from simpleclir.models.io import FormatError
from simpleclir.models.ranking import ScoredList
from simpleclir.models.text import load_stopwords, preprocess_text

__all__ = [
    "BASELINES",
    "MODEL_VARIANTS",
    "Collection",
    "CollectionStats",
    "Document",
    "EmbeddingTable",
    "ExperimentConfig",
    "FormatError",
    "InteractionKind",
    "ModelConfig",
    "ModelFamily",
    "Qrels",
    "Query",
    "QuerySet",
    "ScoredList",
    "TrainConfig",
    "Vocabulary",
    "compute_stats",
    "cosine",
    "coverage_report",
    "load_collection",
    "load_embeddings",
    "load_qrels",
    "load_queries",
    "load_stopwords",
    "nearest_neighbors",
    "preprocess_text",
]
