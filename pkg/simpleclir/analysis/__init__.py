"""Word-pair similarity distributions, threshold sweeps and neighbor tables."""

from simpleclir.analysis.similarity import (
    DistributionSummary,
    NeighborRow,
    SimilarityDistribution,
    ThresholdSweep,
    exact_match_map_sweep,
    format_neighbor_table,
    neighbor_table,
    pair_similarity_distribution,
    summarize_distribution,
    threshold_sweep,
)

__all__ = [
    "DistributionSummary",
    "NeighborRow",
    "SimilarityDistribution",
    "ThresholdSweep",
    "exact_match_map_sweep",
    "format_neighbor_table",
    "neighbor_table",
    "pair_similarity_distribution",
    "summarize_distribution",
    "threshold_sweep",
]
