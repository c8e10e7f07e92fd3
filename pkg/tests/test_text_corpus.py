"""Tests for text preprocessing, corpus loading and experiment configuration."""

import math

import pytest

from simpleclir.models.config import ExperimentConfig, InteractionKind, ModelConfig, ModelFamily, default_kernel_mus
from simpleclir.models.corpus import (
    Collection,
    Document,
    Qrels,
    Vocabulary,
    compute_stats,
    load_collection,
    load_qrels,
    load_queries,
)
from simpleclir.models.io import DATA_DIR_ENV, FormatError, file_digest, resolve_path
from simpleclir.models.text import available_stopword_languages, load_stopwords, preprocess_text


def test_preprocess_text():
    """Lower-casing, boundary punctuation, stopwords and short tokens."""
    assert preprocess_text("The Telephone, a device!", {"the", "a"}) == ["telephone", "device"]
    assert preprocess_text("", set()) == []
    assert preprocess_text("X y-z", set()) == ["y-z"]
    assert preprocess_text("«¿Qué?» teléfono...", set()) == ["qué", "teléfono"]


def test_preprocess_is_idempotent():
    """Preprocessing already preprocessed text changes nothing."""
    raw = "Mobile-phones, (cheap) 'TELEPHONES' and a phone; ok?"
    stopwords = {"and", "a"}
    once = preprocess_text(raw, stopwords)
    assert preprocess_text(" ".join(once), stopwords) == once


def test_shipped_stopwords():
    """Shipped lists exist for the collection languages."""
    assert {"en", "es", "nl", "it", "fi"} <= set(available_stopword_languages())
    assert "the" in load_stopwords("en")
    assert "de" in load_stopwords("es")
    assert load_stopwords(None) == frozenset()


def test_stopwords_from_file(tmp_path):
    """A stopword file holds one lower-cased token per line."""
    path = tmp_path / "stop.txt"
    path.write_text("Foo\nbar\n\n", encoding="utf-8")
    assert load_stopwords(path) == frozenset({"foo", "bar"})


@pytest.fixture
def collection_file(tmp_path):
    path = tmp_path / "collection.tsv"
    path.write_text("d1\tEl teléfono móvil\nd2\tTeléfono y red, red\n", encoding="utf-8")
    return path


def test_load_collection(collection_file):
    """Two lines give two documents sharing one vocabulary."""
    collection, vocabulary = load_collection(collection_file, frozenset({"el", "y"}))
    assert collection.doc_ids == ["d1", "d2"]
    assert collection.terms(collection.get("d1")) == ["teléfono", "móvil"]
    assert collection.terms(collection.get("d2")) == ["teléfono", "red", "red"]
    assert vocabulary.terms == ("teléfono", "móvil", "red")
    assert collection.vocabulary == vocabulary


def test_load_collection_truncation(tmp_path):
    """Documents keep their first ``truncation_limit`` content tokens."""
    path = tmp_path / "long.tsv"
    words = " ".join(f"w{i}" for i in range(600))
    path.write_text(f"d1\t{words}\n", encoding="utf-8")
    collection, _ = load_collection(path, truncation_limit=500)
    assert len(collection.get("d1")) == 500
    assert collection.terms(collection.get("d1"))[-1] == "w499"


def test_truncation_before_stopwords(tmp_path):
    """With ``truncate_after_stopwords=False`` the limit counts raw tokens."""
    path = tmp_path / "c.tsv"
    path.write_text("d1\tthe a b1 c1 d1 e1\n", encoding="utf-8")
    after, _ = load_collection(path, frozenset({"the"}), truncation_limit=3)
    before, _ = load_collection(path, frozenset({"the"}), truncation_limit=3, truncate_after_stopwords=False)
    assert after.terms(after.get("d1")) == ["b1", "c1", "d1"]
    assert before.terms(before.get("d1")) == ["b1"]


def test_load_collection_errors(tmp_path):
    """Duplicate ids and missing tabs name the offending line."""
    path = tmp_path / "dup.tsv"
    path.write_text("d1\tuno dos\nd1\ttres\n", encoding="utf-8")
    with pytest.raises(FormatError, match="line 2"):
        load_collection(path)

    path.write_text("d1 no tab here\n", encoding="utf-8")
    with pytest.raises(FormatError, match="line 1"):
        load_collection(path)

    with pytest.raises(FileNotFoundError):
        load_collection(tmp_path / "missing.tsv")


def test_load_queries_flags_empty(tmp_path):
    """Queries that lose every token are kept and flagged."""
    path = tmp_path / "queries.tsv"
    path.write_text("q1\tThe telephone\nq2\tthe a\n", encoding="utf-8")
    queries = load_queries(path, frozenset({"the", "a"}))
    assert queries.query_ids == ["q1", "q2"]
    assert queries.terms(queries.get("q1")) == ["telephone"]
    assert queries.get("q2").is_empty


def test_compute_stats():
    """Document frequency, idf, lengths and collection probabilities."""
    vocabulary = Vocabulary(terms=("a", "b", "c"))
    collection = Collection(
        documents=(Document(doc_id="d1", tokens=(0, 1, 1)), Document(doc_id="d2", tokens=(0, 2, 2, 2, 2))),
        vocabulary=vocabulary,
    )
    stats = compute_stats(collection)
    assert stats.doc_count == 2
    assert list(stats.doc_freq) == [2, 1, 1]
    assert stats.idf[1] == pytest.approx(math.log(2.0))
    assert stats.avg_doc_len == 4.0
    assert stats.doc_len == {"d1": 3, "d2": 5}
    assert stats.collection_prob(2) == pytest.approx(4 / 8)
    assert stats.idf_of(None) == stats.unseen_idf
    assert all(v >= 0 for v in stats.idf)


def test_compute_stats_rejects_empty():
    """Statistics need at least one document."""
    with pytest.raises(ValueError, match="empty collection"):
        compute_stats(Collection(documents=(), vocabulary=Vocabulary()))


def test_collection_rejects_bad_tokens():
    """Token ids must resolve against the vocabulary."""
    with pytest.raises(ValueError, match="outside the vocabulary"):
        Collection(documents=(Document(doc_id="d1", tokens=(3,)),), vocabulary=Vocabulary(terms=("a",)))


def test_load_qrels(tmp_path):
    """Grades are binarized and -1 means judged non-relevant."""
    path = tmp_path / "qrels.txt"
    path.write_text("q1 0 d7 1\nq1 0 d8 -1\nq1 0 d9 2\nq2 0 d1 0\n", encoding="utf-8")
    qrels = load_qrels(path)
    assert qrels.grade("q1", "d7") == 1
    assert qrels.grade("q1", "d8") == 0
    assert qrels.grade("q1", "d9") == 1
    assert qrels.grade("q1", "d1") is None
    assert qrels.relevant("q1") == {"d7", "d9"}
    assert qrels.non_relevant("q1") == ["d8"]
    assert qrels.judged("q1") == ["d7", "d8", "d9"]
    assert qrels.query_ids == ["q1", "q2"]
    assert len(qrels) == 4


def test_load_qrels_errors(tmp_path):
    """Duplicate judgments and short lines."""
    path = tmp_path / "qrels.txt"
    path.write_text("q1 0 d7 1\nq1 0 d7 0\n", encoding="utf-8")
    with pytest.raises(FormatError, match="duplicate"):
        load_qrels(path)
    path.write_text("q1 0 d7\n", encoding="utf-8")
    with pytest.raises(FormatError, match="expected 4 fields"):
        load_qrels(path)


def test_load_qrels_drops_unknown_documents(tmp_path, collection_file):
    """Judgments of documents missing from the collection are dropped."""
    collection, _ = load_collection(collection_file)
    path = tmp_path / "qrels.txt"
    path.write_text("q1 0 d1 1\nq1 0 dX 0\n", encoding="utf-8")
    assert load_qrels(path, collection).judged("q1") == ["d1"]


def test_load_qrels_duplicate_of_dropped_document(tmp_path, collection_file):
    """A repeated judgment is an error even when its document is filtered out."""
    collection, _ = load_collection(collection_file)
    path = tmp_path / "qrels.txt"
    path.write_text("q1 0 d1 1\nq1 0 dX 0\nq1 0 dX 1\n", encoding="utf-8")
    with pytest.raises(FormatError, match="duplicate judgment for \\(q1, dX\\)"):
        load_qrels(path, collection)


def test_qrels_validation():
    """Only binary grades are accepted."""
    with pytest.raises(ValueError, match="must be 0 or 1"):
        Qrels(judgments={"q1": {"d1": 3}})


def test_resolve_path_uses_data_dir(tmp_path, monkeypatch):
    """Relative paths resolve against the data directory variable."""
    monkeypatch.setenv(DATA_DIR_ENV, str(tmp_path))
    assert resolve_path("a/b.tsv") == tmp_path / "a" / "b.tsv"
    assert resolve_path(tmp_path / "x") == tmp_path / "x"
    monkeypatch.delenv(DATA_DIR_ENV)
    assert str(resolve_path("a/b.tsv")) == "a/b.tsv"


def test_file_digest(tmp_path):
    """SHA-256 of the file contents."""
    path = tmp_path / "f.txt"
    path.write_bytes(b"abc")
    assert file_digest(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_model_variants():
    """Variant names map to family, interaction and translation flag and back."""
    exact = ModelConfig.from_variant("MP-Exact")
    assert exact.family == ModelFamily.MP
    assert exact.interaction == InteractionKind.INDICATOR
    assert exact.variant == "MP-Exact"
    assert ModelConfig.from_variant("DRMM-TbT-QT").translate_query
    assert ModelConfig.from_variant("knrm-cosine").variant == "KNRM-Cosine"
    with pytest.raises(ValueError, match="Unknown model variant"):
        ModelConfig.from_variant("BERT-Cosine")
    with pytest.raises(ValueError, match="only supports cosine"):
        ModelConfig(family=ModelFamily.DRMM, interaction=InteractionKind.GAUSSIAN)


def test_model_defaults():
    """Published hyper-parameters are the defaults."""
    config = ModelConfig()
    assert (config.conv_kernel_size, config.conv_channels) == (3, 64)
    assert (config.pool_rows, config.pool_cols) == (5, 1)
    assert config.histogram_bins == 30
    assert (config.kernel_count, config.kernel_sigma) == (20, 0.1)
    assert config.mus == pytest.approx(default_kernel_mus(20))
    assert default_kernel_mus(20)[0] == pytest.approx(-0.95)
    assert default_kernel_mus(20)[-1] == pytest.approx(0.95)


def test_experiment_config_yaml_round_trip(tmp_path):
    """A written configuration loads back unchanged."""
    config = ExperimentConfig(name="toy", collection="c.tsv", embeddings=["a.vec"], folds=3, variants=["MP-Cosine"])
    path = tmp_path / "config.yaml"
    config.to_yaml(path)
    loaded = ExperimentConfig.from_yaml(path)
    assert loaded == config
    assert loaded.model_config_for("MP-Cosine").conv_channels == 64


def test_experiment_config_validation():
    """Unknown names and too few folds are rejected."""
    with pytest.raises(ValueError, match="Unknown baselines"):
        ExperimentConfig(baselines=["BM25-Mono"])
    with pytest.raises(ValueError):
        ExperimentConfig(folds=2)
    with pytest.raises(ValueError, match="Unknown preset"):
        ExperimentConfig.from_preset("nope")


def test_shipped_presets_load():
    """Every shipped preset is a valid configuration."""
    for name in ("clef", "synthetic"):
        config = ExperimentConfig.from_preset(name)
        assert config.embeddings


def test_shared_model_overrides():
    """Shared architecture settings reach every variant."""
    config = ExperimentConfig(model=ModelConfig(conv_channels=4, seed=3))
    variant = config.model_config_for("MP-Hybrid")
    assert variant.conv_channels == 4
    assert variant.seed == 3
    assert variant.interaction == InteractionKind.HYBRID
