"""Shared toy data for the test suite."""

import numpy as np
import pytest

from simpleclir.models.config import ExperimentConfig, ModelConfig, TrainConfig
from simpleclir.models.corpus import Collection, Document, Vocabulary, compute_stats
from simpleclir.models.embeddings import EmbeddingTable
from simpleclir.models.synthetic import SyntheticConfig, generate_synthetic

# Target terms aa, bb, cc; source terms phone (close to bb) and car (close to cc).
TOY_VECTORS = {
    "aa": [1.0, 0.0, 0.0],
    "bb": [0.0, 1.0, 0.0],
    "cc": [0.0, 0.0, 1.0],
    "phone": [0.1, 0.9, 0.0],
    "car": [0.0, 0.2, 0.9],
}


@pytest.fixture
def toy_table():
    return EmbeddingTable(
        terms=tuple(TOY_VECTORS),
        vectors=np.array(list(TOY_VECTORS.values())),
        source_lang="src",
        target_lang="tgt",
    )


@pytest.fixture
def toy_collection():
    """d1 = aa bb bb, d2 = aa cc cc cc, d3 = cc cc (average length 3)."""
    vocabulary = Vocabulary(terms=("aa", "bb", "cc"))
    return Collection(
        documents=(
            Document(doc_id="d1", tokens=(0, 1, 1)),
            Document(doc_id="d2", tokens=(0, 2, 2, 2)),
            Document(doc_id="d3", tokens=(2, 2)),
        ),
        vocabulary=vocabulary,
    )


@pytest.fixture
def toy_stats(toy_collection):
    return compute_stats(toy_collection)


SMALL_SYNTHETIC = SyntheticConfig(
    n_docs=30,
    n_queries=6,
    dimension=16,
    n_background=30,
    doc_length=12,
    relevant_per_query=3,
    judged_negatives=5,
    seed=11,
)


@pytest.fixture
def small_synthetic(tmp_path):
    """Paths of a small synthetic collection (6 queries, 30 documents)."""
    return generate_synthetic(tmp_path / "synthetic", SMALL_SYNTHETIC)


@pytest.fixture
def small_config(small_synthetic, tmp_path):
    """Experiment configuration over the small synthetic collection with tiny models."""
    return ExperimentConfig(
        name="small",
        collection=str(small_synthetic["collection"]),
        queries=str(small_synthetic["queries"]),
        qrels=str(small_synthetic["qrels"]),
        embeddings=[str(small_synthetic["embeddings"])],
        query_stopwords=str(small_synthetic["query_stopwords"]),
        doc_stopwords=str(small_synthetic["doc_stopwords"]),
        variants=["KNRM-Cosine"],
        folds=3,
        pair_cap=10_000,
        model=ModelConfig(conv_channels=2, mp_hidden=4, seed=5),
        train=TrainConfig(max_epochs=2, batch_size=8, learning_rate=1e-2, seed=3),
        output_dir=str(tmp_path / "out"),
    )
