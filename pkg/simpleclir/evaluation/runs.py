"""TREC run files: ``queryId Q0 docId rank score tag``."""

import os
from collections.abc import Iterable, Mapping
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field

from simpleclir.models.io import FormatError, iter_lines
from simpleclir.models.ranking import ScoredList
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)


class RunEntry(BaseModel):
    """One line of a run file."""

    model_config = ConfigDict(frozen=True)

    query_id: str = Field(..., min_length=1)
    doc_id: str = Field(..., min_length=1)
    rank: int = Field(..., ge=1)
    score: float
    tag: str = Field(..., min_length=1)

    def format(self) -> str:
        return f"{self.query_id} Q0 {self.doc_id} {self.rank} {self.score!r} {self.tag}"


def ranking_entries(ranking: ScoredList, tag: str) -> list[RunEntry]:
    return [
        RunEntry(query_id=ranking.query_id, doc_id=doc_id, rank=rank, score=score, tag=tag)
        for rank, (doc_id, score) in enumerate(ranking.entries, start=1)
    ]


def write_run(
    path: str | os.PathLike[str],
    rankings: "Mapping[str, ScoredList] | Iterable[ScoredList] | Iterable[RunEntry]",
    tag: str = "simpleclir",
) -> Path:
    """Write rankings (or ready-made entries) in query id order."""
    items = list(rankings.values()) if isinstance(rankings, Mapping) else list(rankings)
    if items and isinstance(items[0], RunEntry):
        entries = items
    else:
        entries = [e for ranking in sorted(items, key=lambda r: r.query_id) for e in ranking_entries(ranking, tag)]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            f.write(entry.format() + "\n")
    logger.debug("Wrote %d run lines to %s", len(entries), path)
    return path


def read_run(path: str | os.PathLike[str]) -> list[RunEntry]:
    """Read and validate a run file.

    Raises:
        FormatError: a line without six fields, a non-numeric rank or score, ranks that
            are not 1, 2, ... per query, or a score above the one ranked before it
    """
    entries: list[RunEntry] = []
    last: dict[str, RunEntry] = {}
    for number, line in iter_lines(path):
        fields = line.split()
        if len(fields) != 6:
            raise FormatError(path, number, "expected 'queryId Q0 docId rank score tag'")
        query_id, _, doc_id, rank_text, score_text, tag = fields
        try:
            entry = RunEntry(query_id=query_id, doc_id=doc_id, rank=int(rank_text), score=float(score_text), tag=tag)
        except ValueError as exc:
            raise FormatError(path, number, f"invalid rank or score ({exc.__class__.__name__})") from None
        previous = last.get(query_id)
        expected_rank = 1 if previous is None else previous.rank + 1
        if entry.rank != expected_rank:
            raise FormatError(path, number, f"rank {entry.rank} of query '{query_id}', expected {expected_rank}")
        if previous is not None and entry.score > previous.score:
            raise FormatError(path, number, f"score rises from rank {previous.rank} to rank {entry.rank}")
        last[query_id] = entry
        entries.append(entry)
    return entries


def entries_to_rankings(entries: Iterable[RunEntry]) -> dict[str, ScoredList]:
    """Group entries by query; tied scores are reordered by docId."""
    scores: dict[str, dict[str, float]] = {}
    for entry in entries:
        per_query = scores.setdefault(entry.query_id, {})
        if entry.doc_id in per_query:
            raise ValueError(f"Document '{entry.doc_id}' appears twice for query '{entry.query_id}'")
        per_query[entry.doc_id] = entry.score
    return {qid: ScoredList.from_scores(qid, per_query) for qid, per_query in sorted(scores.items())}
