"""Query-document interaction features.

Interaction matrices feed MatchPyramid; matching histograms feed DRMM and kernel
pooling feeds KNRM. Rows and columns of terms without a vector are masked: they hold 0
and are left out of every histogram or kernel sum.
"""

import os
from collections.abc import Sequence
from enum import Enum
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from simpleclir.models.config import InteractionKind, default_kernel_mus
from simpleclir.models.embeddings import EmbeddingTable
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)

# Tolerance when mapping a similarity onto histogram bin edges
BIN_EPSILON = 1e-9


class MatrixKind(str, Enum):
    """Kinds an interaction matrix can hold (hybrid is two matrices, not one)."""

    COSINE = "cosine"
    GAUSSIAN = "gaussian"
    INDICATOR = "indicator"


class InteractionMatrix(BaseModel):
    """|q| x |d| interaction values of one query-document pair."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    query_id: str = ""
    doc_id: str = ""
    kind: MatrixKind = MatrixKind.COSINE
    eta: float | None = Field(None, description="Threshold of an indicator matrix")
    values: np.ndarray
    valid_rows: np.ndarray = Field(..., description="Query terms with a vector")
    valid_cols: np.ndarray = Field(..., description="Document terms with a vector")

    @model_validator(mode="after")
    def validate_shape(self) -> "InteractionMatrix":
        if self.values.ndim != 2:
            raise ValueError("Interaction values must be a matrix")
        if self.values.shape != (len(self.valid_rows), len(self.valid_cols)):
            raise ValueError("Masks must match the matrix shape")
        if self.kind == MatrixKind.INDICATOR and self.eta is None:
            raise ValueError("An indicator matrix needs eta")
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def degenerate(self) -> bool:
        """True when no query term or no document term has a vector."""
        return not (self.valid_rows.any() and self.valid_cols.any())

    @property
    def label(self) -> str:
        return f"indicator({self.eta:g})" if self.kind == MatrixKind.INDICATOR else self.kind.value


class HistogramFeatures(BaseModel):
    """Matching histograms: ln(1 + count) per query term and bin."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    counts: np.ndarray = Field(..., description="Raw counts, |q| x B")
    valid_rows: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.log1p(self.counts)

    @property
    def bins(self) -> int:
        return int(self.counts.shape[1])


class KernelFeatures(BaseModel):
    """Kernel-pooled soft-match counts per query term and kernel."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray = Field(..., description="|q| x K")
    mus: tuple[float, ...]
    sigma: float = Field(..., gt=0.0)
    valid_rows: np.ndarray


def indicator(cosines: np.ndarray, eta: float) -> np.ndarray:
    """1 where cosine >= eta (inclusive), else 0."""
    if not -1.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [-1, 1], got {eta}")
    return (np.asarray(cosines) >= eta).astype(np.float64)


def build_matrix(
    query_terms: Sequence[str],
    doc_terms: Sequence[str],
    table: EmbeddingTable,
    kind: MatrixKind | InteractionKind | str = MatrixKind.COSINE,
    eta: float = 0.3,
    query_id: str = "",
    doc_id: str = "",
    normalize_gaussian: bool = True,
) -> InteractionMatrix:
    """Interaction matrix between query terms and document terms.

    ``gaussian`` is exp(-||q - d||^2) on unit vectors unless ``normalize_gaussian`` is
    False, in which case raw vectors are used.
    """
    kind = MatrixKind(kind.value if isinstance(kind, Enum) else kind)
    q_unit, q_mask = table.rows(query_terms)
    d_unit, d_mask = table.rows(doc_terms)

    if kind == MatrixKind.GAUSSIAN:
        if normalize_gaussian:
            q_vec, d_vec = q_unit, d_unit
        else:
            q_vec, _ = table.rows(query_terms, normalized=False)
            d_vec, _ = table.rows(doc_terms, normalized=False)
        diff = q_vec[:, None, :] - d_vec[None, :, :]
        values = np.exp(-np.einsum("ijk,ijk->ij", diff, diff))
    else:
        values = np.clip(q_unit @ d_unit.T, -1.0, 1.0)
        if kind == MatrixKind.INDICATOR:
            values = indicator(values, eta)

    values[~q_mask, :] = 0.0
    values[:, ~d_mask] = 0.0
    matrix = InteractionMatrix(
        query_id=query_id,
        doc_id=doc_id,
        kind=kind,
        eta=eta if kind == MatrixKind.INDICATOR else None,
        values=values,
        valid_rows=q_mask,
        valid_cols=d_mask,
    )
    if matrix.degenerate:
        logger.debug("Degenerate %s matrix for (%s, %s)", kind.value, query_id, doc_id)
    return matrix


def _require_cosine(matrix: InteractionMatrix) -> None:
    if matrix.kind != MatrixKind.COSINE:
        raise ValueError(f"Expected a cosine matrix, got {matrix.label}")


def histogram_counts(similarities: np.ndarray, bin_count: int) -> np.ndarray:
    """Counts over equal-width bins on [-1, 1]; bins are right-open except the last."""
    if bin_count < 2:
        raise ValueError("bin_count must be >= 2")
    clamped = np.clip(np.asarray(similarities, dtype=np.float64), -1.0, 1.0)
    index = np.floor((clamped + 1.0) * bin_count / 2.0 + BIN_EPSILON).astype(np.int64)
    return np.bincount(np.minimum(index, bin_count - 1), minlength=bin_count).astype(np.float64)


def build_histogram(matrix: InteractionMatrix, bin_count: int = 30) -> HistogramFeatures:
    """Matching histogram of every query term over the valid document terms."""
    _require_cosine(matrix)
    if bin_count < 2:
        raise ValueError("bin_count must be >= 2")
    counts = np.zeros((matrix.shape[0], bin_count), dtype=np.float64)
    if not matrix.degenerate:
        cols = matrix.values[:, matrix.valid_cols]
        for i in np.flatnonzero(matrix.valid_rows):
            counts[i] = histogram_counts(cols[i], bin_count)
    return HistogramFeatures(counts=counts, valid_rows=matrix.valid_rows)


def kernel_pool(
    matrix: InteractionMatrix, mus: Sequence[float] | None = None, sigma: float = 0.1
) -> KernelFeatures:
    """Sum over valid document terms of exp(-(M_ij - mu_k)^2 / (2 sigma^2))."""
    _require_cosine(matrix)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    mus = tuple(default_kernel_mus() if mus is None else mus)
    values = np.zeros((matrix.shape[0], len(mus)), dtype=np.float64)
    if not matrix.degenerate:
        # Sorted so the sums do not depend on document term order
        rows = np.sort(matrix.values[np.ix_(matrix.valid_rows, matrix.valid_cols)], axis=1)
        centers = np.asarray(mus, dtype=np.float64)
        kernels = np.exp(-((rows[:, :, None] - centers[None, None, :]) ** 2) / (2.0 * sigma**2))
        values[matrix.valid_rows] = kernels.sum(axis=1)
    return KernelFeatures(values=values, mus=mus, sigma=sigma, valid_rows=matrix.valid_rows)


def format_matrix(matrix: InteractionMatrix, precision: int = 6) -> str:
    """Plain-text grid headed by ``queryId docId rows cols kind``."""
    rows, cols = matrix.shape
    lines = [f"{matrix.query_id or '-'} {matrix.doc_id or '-'} {rows} {cols} {matrix.label}"]
    lines.extend(" ".join(f"{v:.{precision}f}" for v in row) for row in matrix.values)
    return "\n".join(lines) + "\n"


def dump_matrix(matrix: InteractionMatrix, path: str | os.PathLike[str]) -> Path:
    """Write ``format_matrix`` output to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_matrix(matrix), encoding="utf-8")
    return path
