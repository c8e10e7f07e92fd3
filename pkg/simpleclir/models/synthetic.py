"""Synthetic two-language test collection with planted relevance.

Concepts are random unit vectors in a latent space. The source language has one word
per concept; the target language has several near-synonymous variants per concept,
observed through a random rotation plus Gaussian noise. The vectors written to disk are
the aligned view (rotation undone), as a downloaded pre-aligned file would be. Every
query owns a few topic concepts; its relevant documents mention one variant of each
topic concept among background words, so a single top-1 translation misses part of
the relevant documents while soft matching does not.
"""

import os
import string
from pathlib import Path

import numpy as np
import yaml
from pydantic import BaseModel, Field, model_validator

from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)

SOURCE_STOPWORDS = ["the", "of", "and", "in", "on"]
TARGET_STOPWORDS = ["el", "la", "de", "que", "en", "los"]


class SyntheticConfig(BaseModel):
    """Shape of the synthetic collection."""

    n_docs: int = Field(200, gt=0)
    n_queries: int = Field(40, gt=0)
    dimension: int = Field(32, gt=1)
    terms_per_query: int = Field(3, gt=0)
    n_background: int = Field(160, gt=0, description="Concepts used as filler text")
    variants: int = Field(3, gt=0, le=26, description="Target-language words per concept")
    doc_length: int = Field(40, gt=0, description="Background words per document")
    mentions: int = Field(3, gt=0, description="Occurrences of each topic concept in a relevant document")
    relevant_per_query: int = Field(5, gt=0)
    judged_negatives: int = Field(15, ge=0)
    variant_spread: float = Field(0.08, ge=0.0, description="Per-coordinate spread of variants around their concept")
    noise: float = Field(0.05, ge=0.0, description="Per-coordinate noise added after rotation")
    stopword_rate: float = Field(0.15, ge=0.0, le=1.0)
    seed: int = Field(7)

    @model_validator(mode="after")
    def validate_sizes(self) -> "SyntheticConfig":
        if self.n_docs < self.n_queries * self.relevant_per_query:
            raise ValueError("n_docs must cover relevant_per_query documents for every query")
        if self.judged_negatives > self.n_docs - self.relevant_per_query:
            raise ValueError("Not enough documents for the requested judged negatives")
        return self


def source_word(concept: int) -> str:
    return f"s{concept:04d}"


def target_word(concept: int, variant: int) -> str:
    return f"t{concept:04d}{string.ascii_lowercase[variant]}"


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    return matrix / np.linalg.norm(matrix, axis=1, keepdims=True)


def _decorate(words: list[str], stopwords: list[str], rate: float, rng: np.random.Generator) -> str:
    out = []
    for word in words:
        if rng.random() < rate:
            out.append(stopwords[int(rng.integers(len(stopwords)))])
        # Occasional capitalization and punctuation exercise preprocessing.
        if rng.random() < 0.1:
            word = word.capitalize() + ","
        out.append(word)
    return " ".join(out)


def generate_synthetic(out_dir: str | os.PathLike[str], config: SyntheticConfig | None = None) -> dict[str, Path]:
    """Write collection, queries, qrels, aligned vectors and stopword lists into ``out_dir``.

    Returns:
        Mapping of artifact name to written path (also ``preset`` for a YAML config).
    """
    config = config or SyntheticConfig()
    rng = np.random.default_rng(config.seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    n_topic = config.n_queries * config.terms_per_query
    n_concepts = n_topic + config.n_background
    d = config.dimension

    concepts = _unit_rows(rng.standard_normal((n_concepts, d)))
    variants = concepts[:, None, :] + config.variant_spread * rng.standard_normal((n_concepts, config.variants, d))
    rotation, _ = np.linalg.qr(rng.standard_normal((d, d)))
    observed = variants @ rotation.T + config.noise * rng.standard_normal(variants.shape)
    aligned = observed @ rotation

    k = config.terms_per_query
    topics = [list(range(q * k, (q + 1) * k)) for q in range(config.n_queries)]
    background = np.arange(n_topic, n_concepts)

    # Document j (j < n_queries * relevant_per_query) is relevant to query j // relevant_per_query.
    documents: list[str] = []
    owner: dict[int, int] = {}
    for j in range(config.n_docs):
        fill = rng.choice(background, size=config.doc_length)
        words = [target_word(int(c), int(rng.integers(config.variants))) for c in fill]
        query = j // config.relevant_per_query
        if query < config.n_queries:
            owner[j] = query
            for concept in topics[query]:
                variant = int(rng.integers(config.variants))
                for _ in range(config.mentions):
                    words.insert(int(rng.integers(len(words) + 1)), target_word(concept, variant))
        documents.append(_decorate(words, TARGET_STOPWORDS, config.stopword_rate, rng))

    doc_ids = [f"doc{j:04d}" for j in range(config.n_docs)]
    query_ids = [f"q{q:03d}" for q in range(config.n_queries)]

    paths = {
        "collection": out / "collection.tsv",
        "queries": out / "queries.tsv",
        "qrels": out / "qrels.txt",
        "embeddings": out / "embeddings.vec",
        "query_stopwords": out / "stopwords_src.txt",
        "doc_stopwords": out / "stopwords_tgt.txt",
        "preset": out / "experiment.yaml",
    }

    with open(paths["collection"], "w", encoding="utf-8") as f:
        for doc_id, text in zip(doc_ids, documents, strict=True):
            f.write(f"{doc_id}\t{text}\n")

    with open(paths["queries"], "w", encoding="utf-8") as f:
        for query_id, concepts_of_query in zip(query_ids, topics, strict=True):
            words = [source_word(c) for c in concepts_of_query]
            f.write(f"{query_id}\t{_decorate(words, SOURCE_STOPWORDS, config.stopword_rate, rng)}\n")

    with open(paths["qrels"], "w", encoding="utf-8") as f:
        for q, query_id in enumerate(query_ids):
            relevant = sorted(j for j, owner_q in owner.items() if owner_q == q)
            others = np.array([j for j in range(config.n_docs) if owner.get(j) != q])
            negatives = sorted(int(j) for j in rng.choice(others, size=config.judged_negatives, replace=False))
            for j in relevant:
                f.write(f"{query_id} 0 {doc_ids[j]} 1\n")
            for j in negatives:
                f.write(f"{query_id} 0 {doc_ids[j]} -1\n")

    with open(paths["embeddings"], "w", encoding="utf-8") as f:
        f.write(f"{n_concepts * (1 + config.variants)} {d}\n")
        for c in range(n_concepts):
            f.write(source_word(c) + " " + " ".join(f"{x:.8f}" for x in concepts[c]) + "\n")
        for c in range(n_concepts):
            for v in range(config.variants):
                f.write(target_word(c, v) + " " + " ".join(f"{x:.8f}" for x in aligned[c, v]) + "\n")

    paths["query_stopwords"].write_text("\n".join(SOURCE_STOPWORDS) + "\n", encoding="utf-8")
    paths["doc_stopwords"].write_text("\n".join(TARGET_STOPWORDS) + "\n", encoding="utf-8")

    preset = {
        "name": "synthetic",
        "collection": str(paths["collection"].resolve()),
        "queries": str(paths["queries"].resolve()),
        "qrels": str(paths["qrels"].resolve()),
        "embeddings": [str(paths["embeddings"].resolve())],
        "source_lang": "src",
        "target_lang": "tgt",
        "query_stopwords": str(paths["query_stopwords"].resolve()),
        "doc_stopwords": str(paths["doc_stopwords"].resolve()),
        "variants": ["MP-Cosine", "DRMM-Cosine", "KNRM-Cosine"],
        "pair_cap": 1_000_000,
        "seed": config.seed,
    }
    with open(paths["preset"], "w", encoding="utf-8") as f:
        yaml.safe_dump(preset, f, sort_keys=False)

    logger.info(
        "Wrote synthetic collection: %d documents, %d queries, %d concepts to %s",
        config.n_docs,
        config.n_queries,
        n_concepts,
        out,
    )
    return paths
