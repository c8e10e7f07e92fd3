"""Loading everything an experiment needs from an ``ExperimentConfig``."""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from simpleclir.models.config import ExperimentConfig
from simpleclir.models.corpus import (
    Collection,
    CollectionStats,
    Qrels,
    QuerySet,
    compute_stats,
    load_collection,
    load_qrels,
    load_queries,
)
from simpleclir.models.embeddings import EmbeddingTable, coverage_report, load_embeddings
from simpleclir.models.text import load_stopwords
from simpleclir.retrieval.unsupervised import QueryTranslator, UnsupervisedRetriever
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)


class ExperimentData(BaseModel):
    """Collection, queries, judgments, vectors and the per-query candidate pools."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: ExperimentConfig
    collection: Collection
    stats: CollectionStats
    queries: QuerySet
    qrels: Qrels
    table: EmbeddingTable
    query_ids: list[str] = Field(..., description="Queries with judgments, in sorted order")
    candidates: dict[str, list[str]] = Field(default_factory=dict, description="Documents reranked per query")
    _translator: QueryTranslator | None = PrivateAttr(None)
    _retriever: UnsupervisedRetriever | None = PrivateAttr(None)

    @property
    def translator(self) -> QueryTranslator:
        """TbT-QT translation into the collection vocabulary, shared by all systems."""
        if self._translator is None:
            self._translator = QueryTranslator(self.table, self.collection.vocabulary.terms)
        return self._translator

    @property
    def retriever(self) -> UnsupervisedRetriever:
        if self._retriever is None:
            self._retriever = UnsupervisedRetriever(
                self.collection,
                self.stats,
                self.table,
                mu=self.config.mu,
                k1=self.config.k1,
                b=self.config.b,
                translator=self.translator,
            )
        return self._retriever

    def query_terms(self, query_id: str) -> list[str]:
        return self.queries.terms(self.queries.get(query_id))

    def build_candidates(self) -> dict[str, list[str]]:
        """Judged documents, or the top ``pool_depth`` TbT-QT-BM25 documents, per query."""
        if self.config.candidate_pool == "judged":
            return {qid: self.qrels.judged(qid) for qid in self.query_ids}
        return {
            qid: self.retriever.rank("TbT-QT-BM25", qid, self.query_terms(qid), depth=self.config.pool_depth).doc_ids
            for qid in self.query_ids
        }


def _require(config: ExperimentConfig, field: str) -> Path:
    path = config.resolved(field)
    if path is None:
        raise ValueError(f"The experiment configuration does not set '{field}'")
    return path


def load_experiment(config: ExperimentConfig) -> ExperimentData:
    """Read collection, queries, qrels and embeddings, and build candidate pools."""
    if not config.embeddings:
        raise ValueError("The experiment configuration lists no embedding files")
    collection, vocabulary = load_collection(
        _require(config, "collection"),
        load_stopwords(config.doc_stopwords),
        truncation_limit=config.truncation_limit,
        truncate_after_stopwords=config.truncate_after_stopwords,
    )
    queries = load_queries(_require(config, "queries"), load_stopwords(config.query_stopwords))
    qrels = load_qrels(_require(config, "qrels"), collection)
    stats = compute_stats(collection)

    wanted = set(vocabulary.terms) | set(queries.vocabulary.terms) if config.restrict_embeddings else None
    table: EmbeddingTable | None = None
    for path in config.embeddings:
        loaded = load_embeddings(path, wanted, config.source_lang, config.target_lang)
        table = loaded if table is None else table.merged(loaded)

    for side, vocab in (("query", queries.vocabulary), ("document", vocabulary)):
        coverage = coverage_report(table, vocab)
        logger.info(
            "%s vocabulary: %d terms embedded, %d OOV (%.1f%%)",
            side.capitalize(),
            coverage.covered,
            coverage.oov,
            100.0 * coverage.oov_rate,
        )

    judged = set(qrels.query_ids)
    query_ids = sorted(q for q in queries.query_ids if q in judged)
    unjudged = len(queries) - len(query_ids)
    if unjudged:
        logger.warning("%d queries have no judgments and are not evaluated", unjudged)

    data = ExperimentData(
        config=config,
        collection=collection,
        stats=stats,
        queries=queries,
        qrels=qrels,
        table=table,
        query_ids=query_ids,
    )
    data.candidates = data.build_candidates()
    logger.info(
        "Experiment '%s': %d documents, %d evaluated queries, %s pool",
        config.name,
        len(collection),
        len(query_ids),
        config.candidate_pool,
    )
    return data
