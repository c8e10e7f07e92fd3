"""Cross-lingual word-pair similarity analysis.

Similarities are taken between unique embedded query terms and unique embedded
document terms. Full cross products larger than the sampling cap are replaced by a
seeded uniform sample of pairs.
"""

import os
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import skew

from simpleclir.evaluation.crossval import FoldPlan, cross_validate
from simpleclir.evaluation.experiment import ExperimentData
from simpleclir.models.config import TrainConfig
from simpleclir.models.embeddings import CandidateIndex, EmbeddingTable
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)

# Rows of sampled pairs materialized at once
SAMPLE_CHUNK = 20_000


class SimilarityDistribution(BaseModel):
    """Density histogram of pair similarities over [-1, 1], plus the similarities themselves."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    bin_edges: np.ndarray
    density: np.ndarray
    similarities: np.ndarray = Field(..., description="Unbinned pair similarities")
    total_pairs: int = Field(..., gt=0, description="Size of the full cross product")
    sampled: bool = False

    @model_validator(mode="after")
    def validate_density(self) -> "SimilarityDistribution":
        if len(self.bin_edges) != len(self.density) + 1:
            raise ValueError("Expected one more bin edge than density values")
        if np.any(self.density < 0):
            raise ValueError("Density must be non-negative")
        mass = float(np.sum(self.density * np.diff(self.bin_edges)))
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"Density integrates to {mass}, not 1")
        return self

    @property
    def bins(self) -> int:
        return len(self.density)

    @property
    def pairs(self) -> int:
        """Number of similarities the histogram was built from."""
        return len(self.similarities)


class DistributionSummary(BaseModel):
    """Shape of a pair-similarity distribution."""

    pairs: int
    mean: float
    std: float
    skewness: float
    threshold: float
    fraction_above: float = Field(..., ge=0.0, le=1.0)


class ThresholdSweep(BaseModel):
    """Fraction of pairs with similarity >= eta, optionally with MP-Exact MAP at each eta."""

    etas: list[float]
    fraction_above: list[float]
    map_at_eta: list[float] | None = None

    @model_validator(mode="after")
    def validate_curve(self) -> "ThresholdSweep":
        if len(self.fraction_above) != len(self.etas):
            raise ValueError("One fraction per eta")
        if self.map_at_eta is not None and len(self.map_at_eta) != len(self.etas):
            raise ValueError("One MAP value per eta")
        if any(not 0.0 <= f <= 1.0 for f in self.fraction_above):
            raise ValueError("Fractions must lie in [0, 1]")
        if any(b > a for a, b in zip(self.fraction_above, self.fraction_above[1:], strict=False)):
            raise ValueError("fraction_above must be nonincreasing in eta")
        return self


def _embedded_terms(vocab: Iterable[str], table: EmbeddingTable) -> list[str]:
    return sorted({t for t in getattr(vocab, "terms", vocab) if t in table})


def pair_similarity_distribution(
    query_vocab: Iterable[str],
    doc_vocab: Iterable[str],
    table: EmbeddingTable,
    bin_count: int = 100,
    sampling_cap: int | None = 10_000_000,
    seed: int = 42,
) -> SimilarityDistribution:
    """Cosine distribution over all (or a capped uniform sample of) query-term x document-term pairs."""
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    query_terms = _embedded_terms(query_vocab, table)
    doc_terms = _embedded_terms(doc_vocab, table)
    if not query_terms or not doc_terms:
        raise ValueError("No embeddable word pairs: a vocabulary has no embedded term")
    queries, _ = table.rows(query_terms)
    docs, _ = table.rows(doc_terms)
    total = len(query_terms) * len(doc_terms)

    if sampling_cap is None or total <= sampling_cap:
        similarities = (queries @ docs.T).ravel()
        sampled = False
    else:
        rng = np.random.default_rng(seed)
        picks = rng.integers(0, total, size=sampling_cap)
        rows, cols = np.divmod(picks, len(doc_terms))
        similarities = np.empty(sampling_cap, dtype=np.float64)
        for start in range(0, sampling_cap, SAMPLE_CHUNK):
            stop = start + SAMPLE_CHUNK
            similarities[start:stop] = np.einsum("ij,ij->i", queries[rows[start:stop]], docs[cols[start:stop]])
        sampled = True
        logger.info("Sampled %d of %d word pairs (seed %d)", sampling_cap, total, seed)

    similarities = np.clip(similarities, -1.0, 1.0)
    density, edges = np.histogram(similarities, bins=bin_count, range=(-1.0, 1.0), density=True)
    return SimilarityDistribution(
        bin_edges=edges, density=density, similarities=similarities, total_pairs=total, sampled=sampled
    )


def summarize_distribution(distribution: SimilarityDistribution, threshold: float = 0.4) -> DistributionSummary:
    """Mean, standard deviation, skewness and the mass at or above ``threshold``."""
    values = distribution.similarities
    spread = float(values.std())
    return DistributionSummary(
        pairs=len(values),
        mean=float(values.mean()),
        std=spread,
        skewness=float(skew(values)) if spread > 0 else 0.0,
        threshold=threshold,
        fraction_above=float(np.count_nonzero(values >= threshold)) / len(values),
    )


def threshold_sweep(
    distribution: SimilarityDistribution,
    etas: Sequence[float],
    map_at_eta: Sequence[float] | None = None,
) -> ThresholdSweep:
    """Complementary CDF of the unbinned pair similarities at every eta."""
    etas = [float(e) for e in etas]
    if any(b < a for a, b in zip(etas, etas[1:], strict=False)):
        raise ValueError("etas must be sorted ascending")
    ordered = np.sort(distribution.similarities)
    n = len(ordered)
    below = np.searchsorted(ordered, etas, side="left")
    return ThresholdSweep(
        etas=etas,
        fraction_above=[float(n - b) / n for b in below],
        map_at_eta=list(map_at_eta) if map_at_eta is not None else None,
    )


class NeighborRow(BaseModel):
    """Top-k translation candidates of one term."""

    term: str
    neighbors: list[tuple[str, float]] = Field(default_factory=list)
    oov: bool = False


def neighbor_table(
    terms: Sequence[str],
    k: int,
    table: EmbeddingTable,
    target_vocab: "Iterable[str] | CandidateIndex",
    exclude_self: bool = False,
) -> list[NeighborRow]:
    """Nearest target-vocabulary neighbors of each term; OOV terms give a flagged empty row.

    With ``exclude_self`` a candidate spelled like the term itself is skipped, which
    is what a monolingual neighbor list wants.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    index = target_vocab if isinstance(target_vocab, CandidateIndex) else CandidateIndex(table, target_vocab)
    rows = []
    for term in terms:
        unit = table.unit_vector(term)
        if unit is None:
            rows.append(NeighborRow(term=term, oov=True))
        else:
            found = index.top_k(unit, k + 1 if exclude_self else k)
            if exclude_self:
                found = [(n, s) for n, s in found if n != term][:k]
            rows.append(NeighborRow(term=term, neighbors=found))
    return rows


def neighbor_frame(rows: Sequence[NeighborRow]) -> pd.DataFrame:
    """Long table ``term, rank, neighbor, similarity`` with similarities at 3 decimals."""
    records = []
    for row in rows:
        if row.oov:
            records.append({"term": row.term, "rank": None, "neighbor": "OOV", "similarity": None})
        for rank, (neighbor, similarity) in enumerate(row.neighbors, start=1):
            records.append({"term": row.term, "rank": rank, "neighbor": neighbor, "similarity": round(similarity, 3)})
    return pd.DataFrame(records, columns=["term", "rank", "neighbor", "similarity"])


def format_neighbor_table(rows: Sequence[NeighborRow]) -> str:
    """One line per term: ``neighbor (0.535)`` cells in rank order."""
    width = max((len(r.neighbors) for r in rows), default=0)
    if width == 0:
        return "\n".join(f"{row.term}: OOV" for row in rows)
    grid = {
        row.term: (
            ["OOV"] + [""] * (width - 1)
            if row.oov
            else [f"{n} ({s:.3f})" for n, s in row.neighbors] + [""] * (width - len(row.neighbors))
        )
        for row in rows
    }
    frame = pd.DataFrame.from_dict(grid, orient="index", columns=[str(i) for i in range(1, width + 1)])
    return frame.to_string()


def distribution_frame(distribution: SimilarityDistribution) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "bin_lo": distribution.bin_edges[:-1],
            "bin_hi": distribution.bin_edges[1:],
            "density": distribution.density,
        }
    )


def sweep_frame(sweep: ThresholdSweep) -> pd.DataFrame:
    frame = pd.DataFrame({"eta": sweep.etas, "fraction_above": sweep.fraction_above})
    if sweep.map_at_eta is not None:
        frame["map"] = sweep.map_at_eta
    return frame


def write_distribution_csv(path: str | os.PathLike[str], distribution: SimilarityDistribution) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    distribution_frame(distribution).to_csv(path, index=False)
    return path


def write_sweep_csv(path: str | os.PathLike[str], sweep: ThresholdSweep) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sweep_frame(sweep).to_csv(path, index=False)
    return path


def exact_match_map_sweep(
    data: ExperimentData,
    etas: Sequence[float],
    fold_plan: FoldPlan,
    train_config: TrainConfig | None = None,
) -> list[float]:
    """Cross-validated MP-Exact MAP at every exact-match threshold."""
    maps = []
    for eta in etas:
        config = data.config.model_config_for("MP-Exact").model_copy(update={"eta": float(eta)})
        report = cross_validate(config, data, fold_plan, train_config=train_config)
        logger.info("MP-Exact at eta %.2f: MAP %.4f", eta, report.mean_ap)
        maps.append(report.mean_ap)
    return maps
