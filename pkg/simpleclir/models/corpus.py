"""Collections, queries, relevance judgments and collection statistics."""

import os
from collections import Counter
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, computed_field, model_validator

from simpleclir.models.io import FormatError, iter_lines
from simpleclir.models.text import preprocess_text
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)

DEFAULT_TRUNCATION = 500


class Vocabulary(BaseModel):
    """Bijective term <-> termId map with dense ids in ``[0, len)``."""

    model_config = ConfigDict(frozen=True)

    terms: tuple[str, ...] = Field(default=(), description="termId -> term")
    _index: dict[str, int] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: object) -> None:
        """Build the reverse index; repeated terms would break bijectivity."""
        index = {term: i for i, term in enumerate(self.terms)}
        if len(index) != len(self.terms):
            raise ValueError("Vocabulary terms must be unique")
        self._index = index

    @classmethod
    def from_terms(cls, terms: "list[str] | tuple[str, ...]") -> "Vocabulary":
        """Build a vocabulary from terms in first-seen order, ignoring repeats."""
        return cls(terms=tuple(dict.fromkeys(terms)))

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: object) -> bool:
        return term in self._index

    def id_of(self, term: str) -> int | None:
        """termId of a term, or None when the term is unknown."""
        return self._index.get(term)

    def term(self, term_id: int) -> str:
        return self.terms[term_id]

    def decode(self, tokens: "tuple[int, ...] | list[int]") -> list[str]:
        return [self.terms[t] for t in tokens]


class Document(BaseModel):
    """A preprocessed, truncated document."""

    model_config = ConfigDict(frozen=True)

    doc_id: str = Field(..., min_length=1, description="Document identifier")
    tokens: tuple[int, ...] = Field(default=(), description="termIds after preprocessing")

    @cached_property
    def term_counts(self) -> Counter[int]:
        """Term frequencies of the document."""
        return Counter(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


class Query(BaseModel):
    """A preprocessed query (topic title)."""

    model_config = ConfigDict(frozen=True)

    query_id: str = Field(..., min_length=1, description="Query identifier")
    tokens: tuple[int, ...] = Field(default=(), description="termIds after preprocessing")

    @computed_field
    @property
    def is_empty(self) -> bool:
        """Flag for queries that lost every token during preprocessing."""
        return not self.tokens

    def __len__(self) -> int:
        return len(self.tokens)


class Collection(BaseModel):
    """Documents of one target-language collection together with their vocabulary."""

    model_config = ConfigDict(frozen=True)

    documents: tuple[Document, ...]
    vocabulary: Vocabulary
    _by_id: dict[str, Document] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: object) -> None:
        """Index documents; ids must be unique and tokens resolve against the vocabulary."""
        by_id: dict[str, Document] = {}
        size = len(self.vocabulary)
        for doc in self.documents:
            if doc.doc_id in by_id:
                raise ValueError(f"Duplicate docId '{doc.doc_id}'")
            if doc.tokens and (min(doc.tokens) < 0 or max(doc.tokens) >= size):
                raise ValueError(f"Document '{doc.doc_id}' has termIds outside the vocabulary")
            by_id[doc.doc_id] = doc
        self._by_id = by_id

    def __len__(self) -> int:
        return len(self.documents)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._by_id

    @property
    def doc_ids(self) -> list[str]:
        return [doc.doc_id for doc in self.documents]

    def get(self, doc_id: str) -> Document:
        """Look up a document by id (KeyError when unknown)."""
        return self._by_id[doc_id]

    def terms(self, doc: Document) -> list[str]:
        return self.vocabulary.decode(doc.tokens)


class QuerySet(BaseModel):
    """Source-language queries together with their own vocabulary."""

    model_config = ConfigDict(frozen=True)

    queries: tuple[Query, ...]
    vocabulary: Vocabulary
    _by_id: dict[str, Query] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: object) -> None:
        by_id: dict[str, Query] = {}
        for query in self.queries:
            if query.query_id in by_id:
                raise ValueError(f"Duplicate queryId '{query.query_id}'")
            by_id[query.query_id] = query
        self._by_id = by_id

    def __len__(self) -> int:
        return len(self.queries)

    def __contains__(self, query_id: object) -> bool:
        return query_id in self._by_id

    @property
    def query_ids(self) -> list[str]:
        return [q.query_id for q in self.queries]

    def get(self, query_id: str) -> Query:
        return self._by_id[query_id]

    def terms(self, query: Query) -> list[str]:
        return self.vocabulary.decode(query.tokens)

    def subset(self, query_ids: "list[str] | set[str]") -> list[Query]:
        """Queries with the given ids, in set order."""
        wanted = set(query_ids)
        return [q for q in self.queries if q.query_id in wanted]


def bm25_idf(doc_count: int, df: "int | np.ndarray") -> "float | np.ndarray":
    """ln((N - df + 0.5) / (df + 0.5) + 1), non-negative for 0 <= df <= N."""
    return np.log((doc_count - df + 0.5) / (df + 0.5) + 1.0)


class CollectionStats(BaseModel):
    """Statistics of a collection used by the baselines and by DRMM gating.

    Arrays are indexed by termId of the collection vocabulary.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    doc_count: int = Field(..., gt=0)
    doc_freq: np.ndarray = Field(..., description="termId -> number of documents containing it")
    collection_freq: np.ndarray = Field(..., description="termId -> total occurrences")
    idf: np.ndarray = Field(..., description="termId -> BM25-style idf")
    total_tokens: int = Field(..., ge=0)
    avg_doc_len: float = Field(..., ge=0.0)
    doc_len: dict[str, int]

    @property
    def unseen_idf(self) -> float:
        """idf assigned to terms that occur in no document (df = 0)."""
        return float(bm25_idf(self.doc_count, 0))

    def idf_of(self, term_id: int | None) -> float:
        """idf of a termId; unknown ids get the df = 0 value."""
        if term_id is None or term_id < 0 or term_id >= len(self.idf):
            return self.unseen_idf
        return float(self.idf[term_id])

    def collection_prob(self, term_id: int) -> float:
        """Maximum-likelihood p(t|C)."""
        if self.total_tokens == 0:
            return 0.0
        return float(self.collection_freq[term_id]) / self.total_tokens


def _parse_tsv(path: str | os.PathLike[str], kind: str):
    for number, line in iter_lines(path):
        ident, sep, text = line.partition("\t")
        ident = ident.strip()
        if not sep or not ident:
            raise FormatError(path, number, f"expected '{kind}<TAB>text'")
        yield number, ident, text


def _truncate(raw: str, stopwords: frozenset[str], limit: int, after_stopwords: bool) -> list[str]:
    if after_stopwords:
        return preprocess_text(raw, stopwords)[:limit]
    return preprocess_text(" ".join(raw.split()[:limit]), stopwords)


def load_collection(
    path: str | os.PathLike[str],
    stopwords: frozenset[str] = frozenset(),
    truncation_limit: int = DEFAULT_TRUNCATION,
    truncate_after_stopwords: bool = True,
) -> tuple[Collection, Vocabulary]:
    """Load a ``docId<TAB>raw text`` collection file.

    Every document is preprocessed and truncated to its first ``truncation_limit``
    tokens. By default the limit applies to content tokens (after stopword removal);
    ``truncate_after_stopwords=False`` applies it to raw whitespace tokens instead.

    Raises:
        FormatError: malformed line or duplicate docId (names the line number)
    """
    if truncation_limit < 1:
        raise ValueError("truncation_limit must be positive")

    index: dict[str, int] = {}
    docs: list[Document] = []
    seen: set[str] = set()
    for number, doc_id, text in _parse_tsv(path, "docId"):
        if doc_id in seen:
            raise FormatError(path, number, f"duplicate docId '{doc_id}'")
        seen.add(doc_id)
        tokens = _truncate(text, stopwords, truncation_limit, truncate_after_stopwords)
        ids = tuple(index.setdefault(t, len(index)) for t in tokens)
        docs.append(Document(doc_id=doc_id, tokens=ids))

    vocabulary = Vocabulary(terms=tuple(index))
    collection = Collection(documents=tuple(docs), vocabulary=vocabulary)
    logger.info("Loaded %d documents (%d distinct terms) from %s", len(docs), len(vocabulary), path)
    return collection, vocabulary


def load_queries(path: str | os.PathLike[str], stopwords: frozenset[str] = frozenset()) -> QuerySet:
    """Load a ``queryId<TAB>title`` file. Queries empty after preprocessing are kept and flagged."""
    index: dict[str, int] = {}
    queries: list[Query] = []
    seen: set[str] = set()
    for number, query_id, text in _parse_tsv(path, "queryId"):
        if query_id in seen:
            raise FormatError(path, number, f"duplicate queryId '{query_id}'")
        seen.add(query_id)
        tokens = preprocess_text(text, stopwords)
        if not tokens:
            logger.warning("Query '%s' is empty after preprocessing", query_id)
        queries.append(Query(query_id=query_id, tokens=tuple(index.setdefault(t, len(index)) for t in tokens)))

    logger.info("Loaded %d queries from %s", len(queries), path)
    return QuerySet(queries=tuple(queries), vocabulary=Vocabulary(terms=tuple(index)))


def compute_stats(collection: Collection) -> CollectionStats:
    """Document frequencies, idf, collection frequencies and lengths of a collection."""
    if len(collection) == 0:
        raise ValueError("Cannot compute statistics of an empty collection")

    size = len(collection.vocabulary)
    doc_freq = np.zeros(size, dtype=np.int64)
    collection_freq = np.zeros(size, dtype=np.int64)
    doc_len: dict[str, int] = {}
    for doc in collection.documents:
        doc_len[doc.doc_id] = len(doc)
        if doc.tokens:
            ids = np.fromiter(doc.term_counts.keys(), dtype=np.int64)
            counts = np.fromiter(doc.term_counts.values(), dtype=np.int64)
            doc_freq[ids] += 1
            collection_freq[ids] += counts

    doc_count = len(collection)
    total = int(collection_freq.sum())
    return CollectionStats(
        doc_count=doc_count,
        doc_freq=doc_freq,
        collection_freq=collection_freq,
        idf=bm25_idf(doc_count, doc_freq.astype(np.float64)),
        total_tokens=total,
        avg_doc_len=total / doc_count,
        doc_len=doc_len,
    )


class Qrels(BaseModel):
    """Binary relevance judgments: grade 1 relevant, grade 0 judged non-relevant."""

    model_config = ConfigDict(frozen=True)

    judgments: dict[str, dict[str, int]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_grades(self) -> "Qrels":
        for query_id, docs in self.judgments.items():
            for doc_id, grade in docs.items():
                if grade not in (0, 1):
                    raise ValueError(f"Grade of ({query_id}, {doc_id}) must be 0 or 1, got {grade}")
        return self

    @property
    def query_ids(self) -> list[str]:
        return sorted(self.judgments)

    def grade(self, query_id: str, doc_id: str) -> int | None:
        """Grade of a judged pair, None when the pair is unjudged."""
        return self.judgments.get(query_id, {}).get(doc_id)

    def judged(self, query_id: str) -> list[str]:
        """Judged docIds of a query in docId order."""
        return sorted(self.judgments.get(query_id, {}))

    def relevant(self, query_id: str) -> set[str]:
        return {d for d, g in self.judgments.get(query_id, {}).items() if g == 1}

    def non_relevant(self, query_id: str) -> list[str]:
        """Judged non-relevant docIds (negative-sample candidates) in docId order."""
        return sorted(d for d, g in self.judgments.get(query_id, {}).items() if g == 0)

    def __len__(self) -> int:
        return sum(len(docs) for docs in self.judgments.values())


def load_qrels(path: str | os.PathLike[str], collection: Collection | None = None) -> Qrels:
    """Load TREC qrels ``queryId iter docId grade``.

    Grades -1 and 0 map to 0, grades >= 1 map to 1. When a collection is given,
    judgments of documents missing from it are dropped with a warning.

    Raises:
        FormatError: unparseable line or duplicate (queryId, docId) pair
    """
    judgments: dict[str, dict[str, int]] = {}
    seen: set[tuple[str, str]] = set()
    dropped = 0
    for number, line in iter_lines(path):
        fields = line.split()
        if len(fields) != 4:
            raise FormatError(path, number, f"expected 4 fields, got {len(fields)}")
        query_id, _iteration, doc_id, raw_grade = fields
        try:
            grade = int(raw_grade)
        except ValueError:
            raise FormatError(path, number, f"grade '{raw_grade}' is not an integer") from None
        if (query_id, doc_id) in seen:
            raise FormatError(path, number, f"duplicate judgment for ({query_id}, {doc_id})")
        seen.add((query_id, doc_id))
        if collection is not None and doc_id not in collection:
            dropped += 1
            continue
        judgments.setdefault(query_id, {})[doc_id] = 1 if grade >= 1 else 0

    if dropped:
        logger.warning("Dropped %d judgments of documents missing from the collection", dropped)
    qrels = Qrels(judgments=judgments)
    logger.info("Loaded %d judgments for %d queries from %s", len(qrels), len(judgments), path)
    return qrels
