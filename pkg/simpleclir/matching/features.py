"""Per-pair model inputs, built once and cached for training and reranking."""

import numpy as np
from pydantic import BaseModel, ConfigDict

from simpleclir.matching.interaction import (
    HistogramFeatures,
    InteractionMatrix,
    KernelFeatures,
    MatrixKind,
    build_histogram,
    build_matrix,
    indicator,
    kernel_pool,
)
from simpleclir.models.config import InteractionKind, ModelConfig, ModelFamily
from simpleclir.models.corpus import Collection, CollectionStats, QuerySet
from simpleclir.models.embeddings import EmbeddingTable
from simpleclir.retrieval.unsupervised import QueryTranslator
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)


class PairFeatures(BaseModel):
    """Everything a ranker reads for one (query, document) pair.

    MatchPyramid reads ``matrices`` (one, or cosine and indicator for the hybrid),
    DRMM reads ``histogram`` and ``gate_idf``, KNRM reads ``kernels``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    query_id: str
    doc_id: str
    matrices: tuple[InteractionMatrix, ...] = ()
    histogram: HistogramFeatures | None = None
    gate_idf: np.ndarray | None = None
    kernels: KernelFeatures | None = None
    degenerate: bool = False


class FeatureBuilder:
    """Builds and caches ``PairFeatures`` for one model configuration.

    Query terms are source-language strings looked up in the shared embedding table;
    TbT-QT variants replace them with their nearest collection term first. Queries
    longer than ``query_max_len`` are truncated.
    """

    def __init__(
        self,
        config: ModelConfig,
        table: EmbeddingTable,
        collection: Collection,
        stats: CollectionStats,
        queries: QuerySet,
        translator: QueryTranslator | None = None,
        cache: bool = True,
    ):
        self.config = config
        self.table = table
        self.collection = collection
        self.stats = stats
        self.queries = queries
        self._translator = translator
        self.cache = cache
        self._features: dict[tuple[str, str], PairFeatures] = {}
        self._query_terms: dict[str, tuple[list[str], list[str]]] = {}

    @property
    def translator(self) -> QueryTranslator:
        if self._translator is None:
            self._translator = QueryTranslator(self.table, self.collection.vocabulary.terms)
        return self._translator

    def _terms(self, query_id: str) -> tuple[list[str], list[str]]:
        """(matching terms, translated terms) of a query, both truncated."""
        if query_id not in self._query_terms:
            original = self.queries.terms(self.queries.get(query_id))[: self.config.query_max_len]
            needs_translation = self.config.translate_query or self.config.family == ModelFamily.DRMM
            translated = list(self.translator.translate(query_id, original).translated) if needs_translation else []
            matching = translated if self.config.translate_query else original
            self._query_terms[query_id] = (matching, translated)
        return self._query_terms[query_id]

    def query_terms(self, query_id: str) -> list[str]:
        """Terms matched against documents (translated for TbT-QT variants)."""
        return list(self._terms(query_id)[0])

    def gate_idf(self, query_id: str) -> np.ndarray:
        """Collection idf of each query term's top-1 translation; unknown terms get the df = 0 idf."""
        vocabulary = self.collection.vocabulary
        return np.array([self.stats.idf_of(vocabulary.id_of(t)) for t in self._terms(query_id)[1]], dtype=np.float64)

    def build(self, query_id: str, doc_id: str) -> PairFeatures:
        key = (query_id, doc_id)
        cached = self._features.get(key)
        if cached is not None:
            return cached
        features = self._compute(query_id, doc_id)
        if self.cache:
            self._features[key] = features
        return features

    def _compute(self, query_id: str, doc_id: str) -> PairFeatures:
        config = self.config
        query_terms = self.query_terms(query_id)
        doc_terms = self.collection.terms(self.collection.get(doc_id))

        def matrix(kind: MatrixKind) -> InteractionMatrix:
            return build_matrix(query_terms, doc_terms, self.table, kind, config.eta, query_id, doc_id)

        if config.family == ModelFamily.MP:
            if config.interaction == InteractionKind.HYBRID:
                cosine = matrix(MatrixKind.COSINE)
                exact = InteractionMatrix(
                    query_id=query_id,
                    doc_id=doc_id,
                    kind=MatrixKind.INDICATOR,
                    eta=config.eta,
                    values=indicator(cosine.values, config.eta) * np.outer(cosine.valid_rows, cosine.valid_cols),
                    valid_rows=cosine.valid_rows,
                    valid_cols=cosine.valid_cols,
                )
                matrices = (cosine, exact)
            else:
                matrices = (matrix(MatrixKind(config.interaction.value)),)
            return PairFeatures(
                query_id=query_id, doc_id=doc_id, matrices=matrices, degenerate=matrices[0].degenerate
            )

        cosine = matrix(MatrixKind.COSINE)
        if config.family == ModelFamily.DRMM:
            return PairFeatures(
                query_id=query_id,
                doc_id=doc_id,
                histogram=build_histogram(cosine, config.histogram_bins),
                gate_idf=self.gate_idf(query_id),
                degenerate=cosine.degenerate,
            )
        return PairFeatures(
            query_id=query_id,
            doc_id=doc_id,
            kernels=kernel_pool(cosine, config.mus, config.kernel_sigma),
            degenerate=cosine.degenerate,
        )

    def clear(self) -> None:
        self._features.clear()
