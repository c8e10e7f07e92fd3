"""Pre-aligned cross-lingual word embeddings and similarity primitives."""

import os
from collections.abc import Collection as TermSet
from collections.abc import Iterable
from pathlib import Path

import numpy as np
import requests
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, computed_field

from simpleclir.models.io import FormatError, iter_lines, resolve_path
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)

# Published aligned fastText vectors, one file per language
FASTTEXT_ALIGNED_URL = "https://dl.fbaipublicfiles.com/fasttext/vectors-aligned/wiki.{lang}.align.vec"


class EmbeddingTable(BaseModel):
    """Term vectors in a shared cross-lingual space.

    Raw vectors are kept as loaded; the unit-normalized view is float64 so that
    similarity accumulation is done in 64-bit precision.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    terms: tuple[str, ...]
    vectors: np.ndarray = Field(..., description="Raw vectors, one row per term")
    source_lang: str = Field("src", description="Label of the query-side language")
    target_lang: str = Field("tgt", description="Label of the document-side language")
    duplicates: int = Field(0, ge=0, description="Rows skipped because the term was already loaded")

    _index: dict[str, int] = PrivateAttr(default_factory=dict)
    _unit: np.ndarray = PrivateAttr(default=None)

    def model_post_init(self, __context: object) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.terms):
            raise ValueError("vectors must be a (terms x dimension) matrix")
        index = {term: i for i, term in enumerate(self.terms)}
        if len(index) != len(self.terms):
            raise ValueError("Embedding terms must be unique")
        norms = np.linalg.norm(self.vectors.astype(np.float64), axis=1)
        if np.any(norms == 0.0):
            zero = self.terms[int(np.argmin(norms))]
            raise ValueError(f"Zero vector for term '{zero}'")
        self._index = index
        self._unit = self.vectors.astype(np.float64) / norms[:, None]

    @computed_field
    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: object) -> bool:
        return term in self._index

    def vector(self, term: str) -> np.ndarray | None:
        """Raw vector of a term, None when out of vocabulary."""
        i = self._index.get(term)
        return None if i is None else self.vectors[i]

    def unit_vector(self, term: str) -> np.ndarray | None:
        i = self._index.get(term)
        return None if i is None else self._unit[i]

    def rows(self, terms: Iterable[str], normalized: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Stack vectors of ``terms`` into a float64 matrix.

        Returns:
            (matrix, mask) where rows of OOV terms are zero and ``mask`` is False.
        """
        terms = list(terms)
        matrix = np.zeros((len(terms), self.dimension), dtype=np.float64)
        mask = np.zeros(len(terms), dtype=bool)
        source = self._unit if normalized else self.vectors
        for r, term in enumerate(terms):
            i = self._index.get(term)
            if i is not None:
                matrix[r] = source[i]
                mask[r] = True
        return matrix, mask

    def merged(self, other: "EmbeddingTable") -> "EmbeddingTable":
        """Union of two tables of equal dimension; for shared terms this table wins."""
        if other.dimension != self.dimension:
            raise ValueError(f"Cannot merge dimension {self.dimension} with {other.dimension}")
        keep = [i for i, term in enumerate(other.terms) if term not in self._index]
        clashes = len(other) - len(keep)
        if clashes:
            logger.warning("%d terms present in both embedding tables; keeping the first", clashes)
        return EmbeddingTable(
            terms=self.terms + tuple(other.terms[i] for i in keep),
            vectors=np.vstack([self.vectors, other.vectors[keep]]),
            source_lang=self.source_lang,
            target_lang=other.target_lang,
            duplicates=self.duplicates + other.duplicates + clashes,
        )


def load_embeddings(
    path: str | os.PathLike[str],
    vocab_filter: TermSet[str] | None = None,
    source_lang: str = "src",
    target_lang: str = "tgt",
    dtype: type = np.float64,
    max_rows: int | None = None,
) -> EmbeddingTable:
    """Load vectors in word2vec text format (``count dimension`` header, then ``term v1 .. vd``).

    Args:
        path: Path to the ``.vec`` file
        vocab_filter: Only keep these terms (memory control)
        source_lang: Language label of the query side
        target_lang: Language label of the document side
        dtype: Storage precision of the raw vectors
        max_rows: Stop after this many rows (vector files are usually frequency sorted)

    Raises:
        FormatError: bad header or a row whose value count differs from the dimension
    """
    lines = iter_lines(path)
    try:
        number, header = next(lines)
    except StopIteration:
        raise FormatError(path, 1, "empty embedding file") from None
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise FormatError(path, number, "expected header 'count dimension'")
    count, dimension = int(parts[0]), int(parts[1])

    terms: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    duplicates = zero_rows = total = 0
    for number, line in lines:
        if max_rows is not None and total >= max_rows:
            break
        fields = line.rstrip().split(" ")
        term, values = fields[0], fields[1:]
        total += 1
        if len(values) != dimension:
            raise FormatError(path, number, f"term '{term}' has {len(values)} values, expected {dimension}")
        if term in seen:
            duplicates += 1
            continue
        seen.add(term)
        if vocab_filter is not None and term not in vocab_filter:
            continue
        try:
            vector = np.asarray(values, dtype=dtype)
        except ValueError:
            raise FormatError(path, number, f"term '{term}' has non-numeric values") from None
        if not np.any(vector):
            zero_rows += 1
            continue
        terms.append(term)
        rows.append(vector)

    if total != count and max_rows is None:
        logger.warning("Header announces %d vectors but %s holds %d", count, path, total)
    if duplicates:
        logger.warning("Skipped %d duplicate terms in %s (first occurrence wins)", duplicates, path)
    if zero_rows:
        logger.warning("Rejected %d zero vectors in %s", zero_rows, path)

    vectors = np.vstack(rows) if rows else np.zeros((0, dimension), dtype=dtype)
    logger.info("Loaded %d of %d vectors (dim %d) from %s", len(terms), total, dimension, path)
    return EmbeddingTable(
        terms=tuple(terms),
        vectors=vectors,
        source_lang=source_lang,
        target_lang=target_lang,
        duplicates=duplicates,
    )


def fetch_embeddings(url: str, dest: str | os.PathLike[str], chunk_size: int = 1 << 20) -> Path:
    """Download a vector file unless ``dest`` already exists."""
    target = resolve_path(dest)
    if target.exists():
        logger.info("Using cached vectors at %s", target)
        return target
    target.parent.mkdir(parents=True, exist_ok=True)
    logger.info("Downloading %s", url)
    with requests.get(url, stream=True, timeout=60) as response:
        response.raise_for_status()
        partial = target.with_suffix(target.suffix + ".part")
        with open(partial, "wb") as f:
            for chunk in response.iter_content(chunk_size=chunk_size):
                f.write(chunk)
    partial.rename(target)
    return target


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in float64, clipped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"Dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("Cosine is undefined for zero vectors")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


class CandidateIndex:
    """Unit vectors of a candidate vocabulary, sorted by term for deterministic ties."""

    def __init__(self, table: EmbeddingTable, candidate_vocab: Iterable[str]):
        self.terms = sorted({t for t in candidate_vocab if t in table})
        self.matrix, _ = table.rows(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def top_k(self, unit: np.ndarray, k: int) -> list[tuple[str, float]]:
        """Exact top-k by cosine; equal similarities are ordered by term."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self.terms:
            return []
        sims = self.matrix @ unit
        if k < len(sims):
            threshold = np.partition(sims, len(sims) - k)[len(sims) - k]
            selected = np.flatnonzero(sims >= threshold)
        else:
            selected = np.arange(len(sims))
        order = selected[np.argsort(-sims[selected], kind="stable")][:k]
        return [(self.terms[i], float(np.clip(sims[i], -1.0, 1.0))) for i in order]


def nearest_neighbors(
    term: str,
    k: int,
    table: EmbeddingTable,
    candidate_vocab: "Iterable[str] | CandidateIndex",
) -> list[tuple[str, float]] | None:
    """Top-k candidates closest to ``term`` by cosine, or None when ``term`` is OOV."""
    if k < 1:
        raise ValueError("k must be >= 1")
    unit = table.unit_vector(term)
    if unit is None:
        return None
    index = candidate_vocab if isinstance(candidate_vocab, CandidateIndex) else CandidateIndex(table, candidate_vocab)
    return index.top_k(unit, k)


class Coverage(BaseModel):
    """Embedding coverage of a vocabulary."""

    covered: int = Field(..., ge=0)
    oov: int = Field(..., ge=0)

    @computed_field
    @property
    def oov_rate(self) -> float:
        total = self.covered + self.oov
        return self.oov / total if total else 0.0


def coverage_report(table: EmbeddingTable, vocabulary: Iterable[str]) -> Coverage:
    """Count vocabulary terms with and without a vector."""
    terms = getattr(vocabulary, "terms", vocabulary)
    covered = oov = 0
    for term in terms:
        if term in table:
            covered += 1
        else:
            oov += 1
    return Coverage(covered=covered, oov=oov)
