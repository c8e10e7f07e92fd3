"""Binary-relevance ranking metrics, computed by trec_eval through pytrec_eval."""

from collections.abc import Iterable, Mapping, Sequence

import pytrec_eval

from simpleclir.models.corpus import Qrels
from simpleclir.models.ranking import ScoredList


def _run_scores(ranked: Sequence[str]) -> dict[str, float]:
    """Strictly decreasing scores that reproduce ``ranked``; repeated ids keep their first rank.

    trec_eval re-sorts tied scores by document id, so the given order is encoded in the scores.
    """
    order = list(dict.fromkeys(ranked))
    return {doc_id: float(len(order) - rank) for rank, doc_id in enumerate(order)}


def trec_average_precisions(
    rankings: Mapping[str, Sequence[str]], relevant: Mapping[str, Iterable[str]]
) -> dict[str, float | None]:
    """AP per query id of ranked document ids against relevant sets.

    Queries without relevant documents map to None; an empty ranking scores 0.0.
    """
    judged = {qid: set(relevant.get(qid, ())) for qid in rankings}
    qrel = {qid: {doc_id: 1 for doc_id in docs} for qid, docs in judged.items() if docs}
    run = {qid: _run_scores(rankings[qid]) for qid in qrel if rankings[qid]}
    measured = pytrec_eval.RelevanceEvaluator(qrel, {"map"}).evaluate(run) if run else {}
    return {
        qid: (float(measured[qid]["map"]) if qid in measured else 0.0) if judged[qid] else None for qid in rankings
    }


def average_precision(ranked: Sequence[str], relevant: Iterable[str]) -> float | None:
    """Average precision of a ranking; relevant documents missing from it count as misses.

    Returns None when ``relevant`` is empty (the query is excluded from MAP).
    """
    return trec_average_precisions({"q": ranked}, {"q": relevant})["q"]


def query_average_precisions(rankings: Mapping[str, ScoredList], qrels: Qrels) -> dict[str, float | None]:
    """AP per query id; queries without relevant judgments map to None."""
    return trec_average_precisions(
        {qid: ranking.doc_ids for qid, ranking in rankings.items()}, {qid: qrels.relevant(qid) for qid in rankings}
    )


def mean_average_precision(per_query: Mapping[str, float | None]) -> float:
    """Mean of the non-excluded APs, in sorted query order; 0.0 when all are excluded."""
    values = [per_query[qid] for qid in sorted(per_query) if per_query[qid] is not None]
    return sum(values) / len(values) if values else 0.0
