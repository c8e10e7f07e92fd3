"""Tests for the unsupervised baselines: BWE-Agg, TbT-QT, query likelihood and BM25."""

import math

import numpy as np
import pytest

from simpleclir.models.corpus import Collection, CollectionStats, Document, Vocabulary, compute_stats
from simpleclir.models.embeddings import EmbeddingTable
from simpleclir.retrieval import (
    QueryTranslator,
    UnsupervisedRetriever,
    Weighting,
    bm25_score,
    bwe_agg_embed,
    bwe_agg_rank,
    ql_score,
    tbtqt_translate,
)


def test_bwe_agg_embed():
    """Uniform and idf-weighted means of raw vectors."""
    table = EmbeddingTable(terms=("xa", "xb"), vectors=np.eye(2))
    np.testing.assert_allclose(bwe_agg_embed(["xa"], table), [1.0, 0.0])
    np.testing.assert_allclose(bwe_agg_embed(["xa", "xb"], table), [0.5, 0.5])

    stats = CollectionStats(
        doc_count=1,
        doc_freq=np.array([1, 1]),
        collection_freq=np.array([1, 1]),
        idf=np.array([3.0, 1.0]),
        total_tokens=2,
        avg_doc_len=2.0,
        doc_len={"d": 2},
    )
    vocabulary = Vocabulary(terms=("xa", "xb"))
    weighted = bwe_agg_embed(["xa", "xb"], table, Weighting.IDF, stats, vocabulary)
    np.testing.assert_allclose(weighted, [0.75, 0.25])


def test_bwe_agg_embed_oov():
    """OOV terms are skipped; all-OOV input gives None."""
    table = EmbeddingTable(terms=("xa",), vectors=np.ones((1, 2)))
    np.testing.assert_allclose(bwe_agg_embed(["zz", "xa"], table), [1.0, 1.0])
    assert bwe_agg_embed(["zz"], table) is None
    with pytest.raises(ValueError, match="idf weighting"):
        bwe_agg_embed(["xa"], table, Weighting.IDF)


def test_bwe_agg_rank_matches_cosine_oracle(toy_collection, toy_table):
    """Scores equal brute-force cosines between mean vectors."""
    ranking = bwe_agg_rank("q1", ["car"], toy_collection, toy_table)
    query = np.array([0.0, 0.2, 0.9])
    expected = {}
    for doc in toy_collection.documents:
        vector = np.mean([toy_table.vector(t) for t in toy_collection.terms(doc)], axis=0)
        expected[doc.doc_id] = float(query @ vector / (np.linalg.norm(query) * np.linalg.norm(vector)))
    assert ranking.doc_ids == ["d3", "d2", "d1"]
    for doc_id, score in ranking.entries:
        assert score == pytest.approx(expected[doc_id], abs=1e-12)
        assert -1.0 <= score <= 1.0


def test_bwe_agg_identical_document_scores_one(toy_collection, toy_table):
    """A document made of the query term scores cosine 1."""
    ranking = bwe_agg_rank("q1", ["cc"], toy_collection, toy_table)
    assert ranking.doc_ids[0] == "d3"
    assert ranking.entries[0][1] == pytest.approx(1.0)


def test_bwe_agg_all_oov_document_ranks_last(toy_table):
    """Documents without embedded terms score -inf."""
    vocabulary = Vocabulary(terms=("aa", "dd"))
    collection = Collection(
        documents=(Document(doc_id="a", tokens=(1,)), Document(doc_id="b", tokens=(0,))),
        vocabulary=vocabulary,
    )
    ranking = bwe_agg_rank("q1", ["phone"], collection, toy_table)
    assert ranking.doc_ids == ["b", "a"]
    assert ranking.entries[-1][1] == -math.inf


def test_bwe_agg_scale_invariance(toy_collection, toy_table):
    """Scaling every vector by a positive constant keeps the ranking."""
    scaled = EmbeddingTable(terms=toy_table.terms, vectors=7.5 * toy_table.vectors)
    for query in (["car"], ["phone", "car"]):
        assert (
            bwe_agg_rank("q", query, toy_collection, scaled).doc_ids
            == bwe_agg_rank("q", query, toy_collection, toy_table).doc_ids
        )


def test_bwe_agg_idf(toy_collection, toy_stats, toy_table):
    """IDF weighting keeps the matching document on top."""
    ranking = bwe_agg_rank("q1", ["phone"], toy_collection, toy_table, Weighting.IDF, toy_stats)
    assert ranking.doc_ids[0] == "d1"


def test_tbtqt_translate(toy_table):
    """Nearest target term per source term; OOV terms are carried through."""
    translated = tbtqt_translate("q1", ["phone", "car", "zzzqqq"], toy_table, ["aa", "bb", "cc"])
    assert translated.translated == ("bb", "cc", "zzzqqq")
    assert translated.oov == (False, False, True)
    assert translated.similarity[0] == pytest.approx(0.9 / math.hypot(0.1, 0.9))


def test_tbtqt_monolingual_maps_to_itself(toy_table):
    """Terms present in the target vocabulary translate to themselves."""
    translated = tbtqt_translate("q1", ["aa", "bb", "cc"], toy_table, ["aa", "bb", "cc"])
    assert translated.translated == ("aa", "bb", "cc")
    assert translated.similarity == pytest.approx((1.0, 1.0, 1.0))


def test_translator_cache(toy_table):
    """Translations are cached per query and map to vocabulary ids."""
    translator = QueryTranslator(toy_table, ["aa", "bb", "cc"])
    first = translator.translate("q1", ["phone"])
    assert translator.translate("q1", ["phone"]) is first
    assert first.term_ids(Vocabulary(terms=("aa", "bb"))) == [1]


def test_ql_score_oracle(toy_collection, toy_stats):
    """Dirichlet query likelihood against the hand-computed formula."""
    d1 = toy_collection.get("d1")
    expected = math.log((1 + 1000 * 2 / 9) / 1003) + math.log((2 + 1000 * 2 / 9) / 1003)
    assert ql_score([0, 1], d1, toy_stats, 1000.0) == pytest.approx(expected, abs=1e-9)
    # Terms unknown to the collection are skipped
    assert ql_score([0, 1, None], d1, toy_stats) == pytest.approx(expected, abs=1e-9)
    with pytest.raises(ValueError, match="mu"):
        ql_score([0], d1, toy_stats, 0.0)


def test_ql_prefers_matching_documents():
    """Same length, more query tokens scores higher."""
    vocabulary = Vocabulary(terms=("aa", "bb"))
    collection = Collection(
        documents=(Document(doc_id="hit", tokens=(0, 0, 0)), Document(doc_id="miss", tokens=(1, 1, 1))),
        vocabulary=vocabulary,
    )
    stats = compute_stats(collection)
    assert ql_score([0], collection.get("hit"), stats) > ql_score([0], collection.get("miss"), stats)


def test_bm25_score_oracle(toy_collection, toy_stats):
    """BM25 against hand-computed values on the three-document corpus."""
    d1, d2, d3 = (toy_collection.get(d) for d in ("d1", "d2", "d3"))
    idf_df1, idf_df2 = math.log(2.5 / 1.5 + 1), math.log(1.5 / 2.5 + 1)
    assert bm25_score([0, 1], d1, toy_stats) == pytest.approx(idf_df2 + 1.375 * idf_df1, abs=1e-9)
    assert bm25_score([0, 1], d2, toy_stats) == pytest.approx(0.88 * idf_df2, abs=1e-9)
    assert bm25_score([0, 1], d3, toy_stats) == 0.0
    # tf = 1 and |d| = avgdl reduce to the idf
    assert bm25_score([0], d1, toy_stats) == pytest.approx(idf_df2, abs=1e-12)
    with pytest.raises(ValueError, match="k1"):
        bm25_score([0], d1, toy_stats, k1=0.0)


def test_retriever_methods(toy_collection, toy_stats, toy_table):
    """All four baselines rank the matching document first."""
    retriever = UnsupervisedRetriever(toy_collection, toy_stats, toy_table)
    for method in ("BWE-Agg-Add", "BWE-Agg-IDF", "TbT-QT-QL", "TbT-QT-BM25"):
        ranking = retriever.rank(method, "q1", ["phone"])
        assert ranking.doc_ids[0] == "d1", method
        assert len(ranking) == 3


def test_retriever_candidates_and_depth(toy_collection, toy_stats, toy_table):
    """Candidate pools, depth cut-offs and unknown method names."""
    retriever = UnsupervisedRetriever(toy_collection, toy_stats, toy_table)
    assert retriever.rank("TbT-QT-BM25", "q1", ["car"], candidates=["d1", "d2"]).doc_ids == ["d2", "d1"]
    assert len(retriever.rank("BWE-Agg-Add", "q1", ["car"], depth=2)) == 2
    assert retriever.rank("TbT-QT-BM25", "q1", ["phone"], depth=1).doc_ids == ["d1"]
    with pytest.raises(ValueError, match="Unknown baseline"):
        retriever.rank("BM25", "q1", ["phone"])


def test_bm25_ties_fall_back_to_doc_id(toy_collection, toy_stats, toy_table):
    """Documents without any translated term tie at zero in docId order."""
    retriever = UnsupervisedRetriever(toy_collection, toy_stats, toy_table)
    ranking = retriever.rank("TbT-QT-BM25", "q1", ["phone"])
    assert ranking.entries[1:] == (("d2", 0.0), ("d3", 0.0))
