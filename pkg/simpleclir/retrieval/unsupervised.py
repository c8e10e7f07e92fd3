"""Unsupervised CLIR baselines over cross-lingual embeddings.

``BWE-Agg`` ranks documents by the cosine of aggregated query and document vectors;
``TbT-QT`` translates every query term to its nearest target-language term and then
retrieves mono-lingually with query likelihood or BM25.
"""

import math
from collections.abc import Iterable, Sequence
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from simpleclir.models.corpus import Collection, CollectionStats, Document, Vocabulary
from simpleclir.models.embeddings import CandidateIndex, EmbeddingTable
from simpleclir.models.ranking import ScoredList
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)


class Weighting(str, Enum):
    """Term weighting of BWE-Agg aggregation."""

    UNIFORM = "uniform"
    IDF = "idf"


class TranslatedQuery(BaseModel):
    """Term-by-term translation of a query; OOV source terms are carried through."""

    model_config = ConfigDict(frozen=True)

    query_id: str
    original: tuple[str, ...]
    translated: tuple[str, ...]
    similarity: tuple[float | None, ...] = Field(..., description="Cosine of each term to its translation")

    @model_validator(mode="after")
    def validate_lengths(self) -> "TranslatedQuery":
        if not len(self.original) == len(self.translated) == len(self.similarity):
            raise ValueError("A translated query keeps one target term per source term")
        return self

    @property
    def oov(self) -> tuple[bool, ...]:
        """Flags of source terms without an embedding."""
        return tuple(s is None for s in self.similarity)

    def term_ids(self, vocabulary: Vocabulary) -> list[int]:
        """Collection termIds of the translated terms, unknown terms dropped."""
        ids = (vocabulary.id_of(t) for t in self.translated)
        return [i for i in ids if i is not None]


def bwe_agg_embed(
    terms: Sequence[str],
    table: EmbeddingTable,
    weighting: Weighting = Weighting.UNIFORM,
    stats: CollectionStats | None = None,
    vocabulary: Vocabulary | None = None,
) -> np.ndarray | None:
    """Mean (or idf-weighted mean) of the raw vectors of ``terms``.

    OOV terms are skipped. Returns None when no term has a vector.
    """
    weighting = Weighting(weighting)
    if weighting == Weighting.IDF and (stats is None or vocabulary is None):
        raise ValueError("idf weighting needs collection statistics and vocabulary")

    total = None
    weight_sum = 0.0
    for term in terms:
        vector = table.vector(term)
        if vector is None:
            continue
        weight = 1.0 if weighting == Weighting.UNIFORM else stats.idf_of(vocabulary.id_of(term))
        contribution = weight * vector.astype(np.float64)
        total = contribution if total is None else total + contribution
        weight_sum += weight
    if total is None or weight_sum == 0.0:
        return None
    return total / weight_sum


class BweAggIndex:
    """Aggregated document vectors of a collection, unit-normalized."""

    def __init__(
        self,
        collection: Collection,
        table: EmbeddingTable,
        weighting: Weighting = Weighting.UNIFORM,
        stats: CollectionStats | None = None,
    ):
        self.collection = collection
        self.table = table
        self.weighting = Weighting(weighting)
        self.doc_ids = collection.doc_ids
        self.matrix = np.zeros((len(collection), table.dimension), dtype=np.float64)
        self.valid = np.zeros(len(collection), dtype=bool)
        for row, doc in enumerate(collection.documents):
            vector = bwe_agg_embed(collection.terms(doc), table, self.weighting, stats, collection.vocabulary)
            if vector is not None and np.any(vector):
                self.matrix[row] = vector / np.linalg.norm(vector)
                self.valid[row] = True
        missing = int((~self.valid).sum())
        if missing:
            logger.warning("%d documents have no embedded term and rank last under BWE-Agg", missing)

    def rank(self, query_id: str, query_terms: Sequence[str], candidates: Iterable[str] | None = None) -> ScoredList:
        """Cosine of the uniformly aggregated query vector to every (candidate) document."""
        query_vector = bwe_agg_embed(query_terms, self.table)
        if query_vector is None or not np.any(query_vector):
            logger.warning("Query '%s' has no embedded term; BWE-Agg scores are all -inf", query_id)
            sims = np.full(len(self.doc_ids), -np.inf)
        else:
            sims = np.clip(self.matrix @ (query_vector / np.linalg.norm(query_vector)), -1.0, 1.0)
            sims[~self.valid] = -np.inf
        scores = dict(zip(self.doc_ids, sims.tolist(), strict=True))
        if candidates is not None:
            scores = {d: scores[d] for d in candidates if d in scores}
        return ScoredList.from_scores(query_id, scores)


def bwe_agg_rank(
    query_id: str,
    query_terms: Sequence[str],
    collection: Collection,
    table: EmbeddingTable,
    weighting: Weighting = Weighting.UNIFORM,
    stats: CollectionStats | None = None,
) -> ScoredList:
    """Full-collection BWE-Agg ranking; documents are idf-weighted under ``Weighting.IDF``.

    The query side is always aggregated uniformly: source-language terms have no
    document frequency in the target collection.
    """
    return BweAggIndex(collection, table, weighting, stats).rank(query_id, query_terms)


def tbtqt_translate(
    query_id: str,
    terms: Sequence[str],
    table: EmbeddingTable,
    target_vocab: "Iterable[str] | CandidateIndex",
) -> TranslatedQuery:
    """Replace every term by its nearest target-language neighbor."""
    index = target_vocab if isinstance(target_vocab, CandidateIndex) else CandidateIndex(table, target_vocab)
    translated: list[str] = []
    similarity: list[float | None] = []
    for term in terms:
        unit = table.unit_vector(term)
        best = index.top_k(unit, 1) if unit is not None else []
        if best:
            translated.append(best[0][0])
            similarity.append(best[0][1])
        else:
            translated.append(term)
            similarity.append(None)
    if any(s is None for s in similarity):
        logger.debug("Query '%s': %d terms left untranslated", query_id, sum(s is None for s in similarity))
    return TranslatedQuery(
        query_id=query_id, original=tuple(terms), translated=tuple(translated), similarity=tuple(similarity)
    )


def ql_score(term_ids: Sequence[int | None], doc: Document, stats: CollectionStats, mu: float = 1000.0) -> float:
    """Dirichlet-smoothed query log-likelihood; terms absent from the collection are skipped."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    counts = doc.term_counts
    denominator = len(doc) + mu
    score = 0.0
    for term_id in term_ids:
        if term_id is None or term_id < 0 or term_id >= len(stats.collection_freq):
            continue
        p_collection = stats.collection_prob(term_id)
        if p_collection <= 0.0:
            continue
        score += math.log((counts.get(term_id, 0) + mu * p_collection) / denominator)
    return score


def bm25_score(
    term_ids: Sequence[int | None], doc: Document, stats: CollectionStats, k1: float = 1.2, b: float = 0.75
) -> float:
    """Okapi BM25 with the collection's idf."""
    if k1 <= 0 or not 0.0 <= b <= 1.0:
        raise ValueError("BM25 needs k1 > 0 and 0 <= b <= 1")
    counts = doc.term_counts
    norm = k1 * (1.0 - b + b * len(doc) / stats.avg_doc_len) if stats.avg_doc_len > 0 else k1
    score = 0.0
    for term_id in term_ids:
        if term_id is None:
            continue
        tf = counts.get(term_id, 0)
        if tf == 0:
            continue
        score += stats.idf_of(term_id) * tf * (k1 + 1.0) / (tf + norm)
    return score


class QueryTranslator:
    """Cached TbT-QT translation into one target vocabulary."""

    def __init__(self, table: EmbeddingTable, target_vocab: "Iterable[str] | CandidateIndex"):
        self.table = table
        self.index = target_vocab if isinstance(target_vocab, CandidateIndex) else CandidateIndex(table, target_vocab)
        self._cache: dict[tuple[str, tuple[str, ...]], TranslatedQuery] = {}

    def translate(self, query_id: str, terms: Sequence[str]) -> TranslatedQuery:
        key = (query_id, tuple(terms))
        if key not in self._cache:
            self._cache[key] = tbtqt_translate(query_id, terms, self.table, self.index)
        return self._cache[key]


class UnsupervisedRetriever:
    """The four unsupervised baselines over one collection."""

    def __init__(
        self,
        collection: Collection,
        stats: CollectionStats,
        table: EmbeddingTable,
        mu: float = 1000.0,
        k1: float = 1.2,
        b: float = 0.75,
        translator: QueryTranslator | None = None,
    ):
        self.collection = collection
        self.stats = stats
        self.table = table
        self.mu = mu
        self.k1 = k1
        self.b = b
        self.translator = translator or QueryTranslator(table, collection.vocabulary.terms)
        self._bwe: dict[Weighting, BweAggIndex] = {}

    def translate(self, query_id: str, terms: Sequence[str]) -> TranslatedQuery:
        """TbT-QT translation against the collection vocabulary."""
        return self.translator.translate(query_id, terms)

    def bwe_index(self, weighting: Weighting) -> BweAggIndex:
        if weighting not in self._bwe:
            self._bwe[weighting] = BweAggIndex(self.collection, self.table, weighting, self.stats)
        return self._bwe[weighting]

    def rank(
        self,
        method: str,
        query_id: str,
        query_terms: Sequence[str],
        candidates: Iterable[str] | None = None,
        depth: int | None = None,
    ) -> ScoredList:
        """Rank with a named baseline (``BWE-Agg-Add``, ``BWE-Agg-IDF``, ``TbT-QT-QL``, ``TbT-QT-BM25``)."""
        if method in ("BWE-Agg-Add", "BWE-Agg-IDF"):
            weighting = Weighting.UNIFORM if method == "BWE-Agg-Add" else Weighting.IDF
            ranking = self.bwe_index(weighting).rank(query_id, query_terms, candidates)
            if depth is not None:
                ranking = ScoredList(query_id=query_id, entries=ranking.entries[:depth])
            return ranking

        if method not in ("TbT-QT-QL", "TbT-QT-BM25"):
            raise ValueError(f"Unknown baseline '{method}'")
        term_ids = self.translate(query_id, query_terms).term_ids(self.collection.vocabulary)
        doc_ids = self.collection.doc_ids if candidates is None else [d for d in candidates if d in self.collection]
        scores = {}
        for doc_id in doc_ids:
            doc = self.collection.get(doc_id)
            if method == "TbT-QT-QL":
                scores[doc_id] = ql_score(term_ids, doc, self.stats, self.mu)
            else:
                scores[doc_id] = bm25_score(term_ids, doc, self.stats, self.k1, self.b)
        return ScoredList.from_scores(query_id, scores, depth)
