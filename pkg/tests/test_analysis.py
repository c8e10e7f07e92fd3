"""Tests for word-pair similarity distributions, threshold sweeps and neighbor tables."""

import numpy as np
import pytest
from scipy.stats import skew

from simpleclir.analysis.similarity import (
    NeighborRow,
    ThresholdSweep,
    exact_match_map_sweep,
    format_neighbor_table,
    neighbor_frame,
    neighbor_table,
    pair_similarity_distribution,
    summarize_distribution,
    sweep_frame,
    threshold_sweep,
    write_distribution_csv,
)
from simpleclir.evaluation.crossval import FoldPlan
from simpleclir.evaluation.experiment import load_experiment
from simpleclir.models.corpus import Vocabulary
from simpleclir.models.embeddings import EmbeddingTable


@pytest.fixture
def random_table():
    rng = np.random.default_rng(5)
    terms = tuple(f"q{i}" for i in range(50)) + tuple(f"d{i}" for i in range(50))
    return EmbeddingTable(terms=terms, vectors=rng.standard_normal((100, 8)))


def test_monolingual_one_hot_vocabulary():
    """Identical orthonormal vocabularies put 1/n of the mass at 1 and the rest at 0."""
    n = 4
    table = EmbeddingTable(terms=tuple(f"w{i}" for i in range(n)), vectors=np.eye(n))
    distribution = pair_similarity_distribution(table.terms, table.terms, table, bin_count=10)
    widths = np.diff(distribution.bin_edges)
    mass = distribution.density * widths
    assert distribution.total_pairs == 16
    assert mass[-1] == pytest.approx(1 / n)
    assert mass[5] == pytest.approx((n - 1) / n)
    assert mass.sum() == pytest.approx(1.0)
    assert threshold_sweep(distribution, [0.5]).fraction_above == [0.25]


def test_two_by_two_pairs():
    """Every query-term x document-term cosine, query terms in sorted order."""
    table = EmbeddingTable(
        terms=("a", "b", "c", "d"), vectors=np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [0.6, 0.8]])
    )
    distribution = pair_similarity_distribution(["b", "a", "zzz"], Vocabulary(terms=("c", "d")), table, bin_count=4)
    np.testing.assert_allclose(distribution.similarities, [1.0, 0.6, 0.0, 0.8], atol=1e-12)
    assert distribution.pairs == distribution.total_pairs == 4
    assert not distribution.sampled
    # Bins of width 0.5: [0, 0.5) holds 0, [0.5, 1] holds the other three
    np.testing.assert_allclose(distribution.density, [0.0, 0.0, 0.5, 1.5])


def test_distribution_integrates_to_one(random_table):
    """The density integrates to 1 over [-1, 1]."""
    distribution = pair_similarity_distribution(
        [f"q{i}" for i in range(50)], [f"d{i}" for i in range(50)], random_table, bin_count=37
    )
    assert np.sum(distribution.density * np.diff(distribution.bin_edges)) == pytest.approx(1.0)
    assert distribution.bin_edges[0] == -1.0
    assert distribution.bin_edges[-1] == 1.0


def test_threshold_sweep_matches_brute_force(random_table):
    """Fractions at or above every eta, counted pair by pair."""
    queries, docs = [f"q{i}" for i in range(50)], [f"d{i}" for i in range(50)]
    distribution = pair_similarity_distribution(queries, docs, random_table)
    brute = [
        float(random_table.unit_vector(q) @ random_table.unit_vector(d)) for q in sorted(queries) for d in sorted(docs)
    ]
    etas = [-1.0, -0.3, 0.0, 0.1, 0.25, 0.5, 0.9, 1.0]
    sweep = threshold_sweep(distribution, etas)
    for eta, fraction in zip(etas, sweep.fraction_above, strict=True):
        assert fraction == pytest.approx(sum(v >= eta for v in brute) / len(brute), abs=1e-3)
    assert sweep.fraction_above[0] == 1.0
    assert all(b <= a for a, b in zip(sweep.fraction_above, sweep.fraction_above[1:], strict=False))


def test_threshold_sweep_validation(random_table):
    """Unsorted thresholds and inconsistent sweeps are rejected; frames carry MAP when given."""
    distribution = pair_similarity_distribution(["q0", "q1"], ["d0", "d1"], random_table)
    with pytest.raises(ValueError, match="sorted ascending"):
        threshold_sweep(distribution, [0.5, 0.1])
    with pytest.raises(ValueError, match="nonincreasing"):
        ThresholdSweep(etas=[0.1, 0.2], fraction_above=[0.3, 0.5])
    with pytest.raises(ValueError, match="One MAP value"):
        ThresholdSweep(etas=[0.1], fraction_above=[0.3], map_at_eta=[0.1, 0.2])

    frame = sweep_frame(threshold_sweep(distribution, [0.0, 0.5], map_at_eta=[0.2, 0.3]))
    assert list(frame.columns) == ["eta", "fraction_above", "map"]


def test_sampling_cap(random_table):
    """Past the cap pairs are sampled uniformly with a fixed seed."""
    queries, docs = [f"q{i}" for i in range(50)], [f"d{i}" for i in range(50)]
    full = pair_similarity_distribution(queries, docs, random_table)
    sampled = pair_similarity_distribution(queries, docs, random_table, sampling_cap=500, seed=3)
    again = pair_similarity_distribution(queries, docs, random_table, sampling_cap=500, seed=3)
    assert sampled.sampled
    assert (sampled.pairs, sampled.total_pairs) == (500, 2500)
    np.testing.assert_array_equal(sampled.similarities, again.similarities)
    gaps = np.abs(sampled.similarities[:, None] - full.similarities[None, :]).min(axis=1)
    assert np.all(gaps < 1e-12)


def test_summarize_distribution(random_table):
    """Moments and the above-threshold fraction of the sampled cosines."""
    distribution = pair_similarity_distribution(["q0", "q1", "q2"], ["d0", "d1", "d2", "d3"], random_table)
    values = distribution.similarities
    summary = summarize_distribution(distribution, threshold=0.4)
    assert summary.pairs == 12
    assert summary.mean == pytest.approx(values.mean())
    assert summary.std == pytest.approx(values.std())
    assert summary.skewness == pytest.approx(skew(values))
    assert summary.fraction_above == pytest.approx(np.mean(values >= 0.4))


def test_distribution_errors(random_table):
    """No embeddable pair or too few bins."""
    with pytest.raises(ValueError, match="No embeddable word pairs"):
        pair_similarity_distribution(["zzz"], ["d0"], random_table)
    with pytest.raises(ValueError, match="bin_count"):
        pair_similarity_distribution(["q0"], ["d0"], random_table, bin_count=0)


def test_write_distribution_csv(tmp_path, random_table):
    """A header and one row per bin."""
    distribution = pair_similarity_distribution(["q0"], ["d0", "d1"], random_table, bin_count=5)
    path = write_distribution_csv(tmp_path / "dist" / "distribution.csv", distribution)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "bin_lo,bin_hi,density"
    assert len(lines) == 6


def test_neighbor_table(toy_table):
    """k larger than the candidate list returns every candidate; OOV terms are flagged."""
    rows = neighbor_table(["phone", "zzz"], 10, toy_table, ["aa", "bb", "cc"])
    assert [n for n, _ in rows[0].neighbors] == ["bb", "aa", "cc"]
    assert rows[1] == NeighborRow(term="zzz", oov=True)
    with pytest.raises(ValueError, match="k must be"):
        neighbor_table(["phone"], 0, toy_table, ["aa"])


def test_neighbor_table_exclude_self(toy_table):
    """A term is its own nearest neighbor unless excluded."""
    vocab = list(toy_table.terms)
    assert neighbor_table(["bb"], 1, toy_table, vocab)[0].neighbors == [("bb", pytest.approx(1.0))]
    (row,) = neighbor_table(["bb"], 2, toy_table, vocab, exclude_self=True)
    assert [n for n, _ in row.neighbors] == ["phone", "car"]


def test_neighbor_formatting(toy_table):
    """Frames and text tables round similarities and show OOV terms."""
    rows = neighbor_table(["phone", "zzz"], 2, toy_table, ["aa", "bb", "cc"])
    frame = neighbor_frame(rows)
    assert list(frame["neighbor"]) == ["bb", "aa", "OOV"]
    assert frame["similarity"].iloc[0] == round(0.9 / np.hypot(0.1, 0.9), 3)
    text = format_neighbor_table(rows)
    assert "bb (0.994)" in text
    assert "OOV" in text


def test_exact_match_map_sweep(mocker, small_config):
    """One cross-validated MP-Exact run per threshold."""
    data = load_experiment(small_config)
    plan = FoldPlan(folds=[[q] for q in data.query_ids[:3]])
    fake = mocker.patch(
        "simpleclir.analysis.similarity.cross_validate",
        side_effect=lambda config, *args, **kwargs: mocker.Mock(mean_ap=config.eta),
    )
    assert exact_match_map_sweep(data, [0.2, 0.6], plan) == [0.2, 0.6]
    configs = [call.args[0] for call in fake.call_args_list]
    assert [c.variant for c in configs] == ["MP-Exact", "MP-Exact"]
    assert configs[0].conv_channels == small_config.model.conv_channels
