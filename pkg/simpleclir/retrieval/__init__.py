"""Unsupervised cross-lingual retrieval baselines."""

from simpleclir.retrieval.unsupervised import (
    QueryTranslator,
    TranslatedQuery,
    UnsupervisedRetriever,
    Weighting,
    bm25_score,
    bwe_agg_embed,
    bwe_agg_rank,
    ql_score,
    tbtqt_translate,
)

__all__ = [
    "QueryTranslator",
    "TranslatedQuery",
    "UnsupervisedRetriever",
    "Weighting",
    "bm25_score",
    "bwe_agg_embed",
    "bwe_agg_rank",
    "ql_score",
    "tbtqt_translate",
]
