"""Ranked result lists shared by baselines, neural rankers and evaluation."""

import math
from collections.abc import Mapping

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ScoredList(BaseModel):
    """Documents of one query sorted by score descending, docId ascending on ties."""

    model_config = ConfigDict(frozen=True)

    query_id: str
    entries: tuple[tuple[str, float], ...] = Field(default=(), description="(docId, score) pairs in rank order")

    @model_validator(mode="after")
    def validate_order(self) -> "ScoredList":
        """No duplicate docIds; entries follow the (score desc, docId asc) order."""
        doc_ids = [d for d, _ in self.entries]
        if len(set(doc_ids)) != len(doc_ids):
            raise ValueError(f"Duplicate docIds in ranking of query '{self.query_id}'")
        if any(math.isnan(s) for _, s in self.entries):
            raise ValueError(f"NaN score in ranking of query '{self.query_id}'")
        keys = [(-s, d) for d, s in self.entries]
        if keys != sorted(keys):
            raise ValueError(f"Ranking of query '{self.query_id}' is not sorted")
        return self

    @classmethod
    def from_scores(cls, query_id: str, scores: Mapping[str, float], depth: int | None = None) -> "ScoredList":
        """Sort a docId -> score map into a ranking, optionally cut at ``depth``."""
        ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
        if depth is not None:
            ordered = ordered[:depth]
        return cls(query_id=query_id, entries=tuple((d, float(s)) for d, s in ordered))

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)
