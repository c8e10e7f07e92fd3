"""k-fold cross-validation with rotating validation and test folds."""

import math
from collections.abc import Callable, Mapping, Sequence
from typing import Protocol, runtime_checkable

import numpy as np
from pydantic import BaseModel, Field, computed_field, model_validator

from simpleclir.evaluation.experiment import ExperimentData
from simpleclir.evaluation.metrics import mean_average_precision, query_average_precisions
from simpleclir.evaluation.significance import paired_t_test
from simpleclir.matching.features import FeatureBuilder
from simpleclir.matching.rankers import Ranker, build_ranker
from simpleclir.matching.training import TrainResult, rerank, train
from simpleclir.models.config import ModelConfig, TrainConfig
from simpleclir.models.ranking import ScoredList
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)


class FoldRound(BaseModel):
    """Query roles in one cross-validation round."""

    index: int = Field(..., ge=0)
    train: list[str]
    validation: list[str]
    test: list[str]


class FoldPlan(BaseModel):
    """A partition of the query ids into k folds.

    Round r tests fold r, validates on fold (r + 1) mod k and trains on the rest.
    """

    folds: list[list[str]]
    seed: int = 42

    @model_validator(mode="after")
    def validate_partition(self) -> "FoldPlan":
        if len(self.folds) < 3:
            raise ValueError("A fold plan needs at least 3 folds (train, validation, test)")
        if any(not fold for fold in self.folds):
            raise ValueError("Every fold needs at least one query")
        ids = [q for fold in self.folds for q in fold]
        if len(ids) != len(set(ids)):
            raise ValueError("Folds must be disjoint")
        return self

    @property
    def k(self) -> int:
        return len(self.folds)

    @property
    def query_ids(self) -> list[str]:
        return sorted(q for fold in self.folds for q in fold)

    def round(self, index: int) -> FoldRound:
        if not 0 <= index < self.k:
            raise ValueError(f"Round {index} outside [0, {self.k})")
        validation = (index + 1) % self.k
        train_ids = sorted(q for f, fold in enumerate(self.folds) if f not in (index, validation) for q in fold)
        return FoldRound(
            index=index,
            train=train_ids,
            validation=sorted(self.folds[validation]),
            test=sorted(self.folds[index]),
        )

    def rounds(self) -> list[FoldRound]:
        return [self.round(r) for r in range(self.k)]


def kfold_split(query_ids: Sequence[str], k: int = 5, seed: int = 42) -> FoldPlan:
    """Seeded shuffle of the sorted query ids, dealt round-robin into k folds."""
    ids = sorted(set(query_ids))
    if k < 3:
        raise ValueError("k must be >= 3")
    if len(ids) < k:
        raise ValueError(f"Cannot split {len(ids)} queries into {k} folds")
    order = np.random.default_rng(seed).permutation(len(ids))
    folds: list[list[str]] = [[] for _ in range(k)]
    for position, index in enumerate(order):
        folds[position % k].append(ids[int(index)])
    return FoldPlan(folds=[sorted(fold) for fold in folds], seed=seed)


@runtime_checkable
class RankingSystem(Protocol):
    """Anything that can be fitted on query ids and rank a candidate pool."""

    name: str

    def fit(self, train_queries: Sequence[str], val_queries: Sequence[str]) -> TrainResult | None: ...

    def rank(self, query_id: str, candidates: Sequence[str]) -> ScoredList: ...


class BaselineSystem:
    """An unsupervised baseline; fitting is a no-op."""

    def __init__(self, name: str, data: ExperimentData):
        self.name = name
        self.data = data

    def fit(self, train_queries: Sequence[str], val_queries: Sequence[str]) -> None:
        return None

    def rank(self, query_id: str, candidates: Sequence[str]) -> ScoredList:
        return self.data.retriever.rank(self.name, query_id, self.data.query_terms(query_id), candidates)


class ScorerSystem:
    """Ranks with a fixed ``score(query_id, doc_id)`` function."""

    def __init__(self, name: str, score: Callable[[str, str], float]):
        self.name = name
        self.score = score

    def fit(self, train_queries: Sequence[str], val_queries: Sequence[str]) -> None:
        return None

    def rank(self, query_id: str, candidates: Sequence[str]) -> ScoredList:
        return ScoredList.from_scores(query_id, {d: float(self.score(query_id, d)) for d in candidates})


class NeuralSystem:
    """A neural ranker retrained from scratch in every round."""

    def __init__(self, config: ModelConfig, train_config: TrainConfig, data: ExperimentData):
        self.config = config
        self.name = config.variant
        self.train_config = train_config
        self.data = data
        self.builder = FeatureBuilder(config, data.table, data.collection, data.stats, data.queries, data.translator)
        self.ranker: Ranker | None = None

    def fit(self, train_queries: Sequence[str], val_queries: Sequence[str]) -> TrainResult:
        self.ranker = build_ranker(self.config)
        return train(
            self.ranker,
            self.builder,
            self.data.qrels,
            train_queries,
            val_queries,
            self.train_config,
            candidates=self.data.candidates,
        )

    def rank(self, query_id: str, candidates: Sequence[str]) -> ScoredList:
        if self.ranker is None:
            raise ValueError(f"{self.name} has not been fitted")
        return rerank(self.ranker, self.builder, query_id, candidates)


class Comparison(BaseModel):
    """Paired t-test of a system against a baseline over shared queries."""

    system: str
    baseline: str
    system_map: float
    baseline_map: float
    t: float
    p: float = Field(..., ge=0.0, le=1.0)
    significant: bool
    queries: int


class RoundResult(BaseModel):
    index: int
    test_queries: int
    test_map: float
    best_epoch: int | None = None
    val_map: float | None = None


class EvalReport(BaseModel):
    """Per-query AP of one system, its MAP, and comparisons against baselines."""

    system: str
    per_query_ap: dict[str, float] = Field(default_factory=dict)
    excluded: list[str] = Field(default_factory=list, description="Queries without relevant documents")
    comparisons: list[Comparison] = Field(default_factory=list)
    rounds: list[RoundResult] = Field(default_factory=list)
    rankings: dict[str, ScoredList] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_ap(self) -> "EvalReport":
        bad = [q for q, ap in self.per_query_ap.items() if not 0.0 <= ap <= 1.0]
        if bad:
            raise ValueError(f"AP outside [0, 1] for queries {bad[:5]}")
        return self

    @computed_field
    @property
    def mean_ap(self) -> float:
        return mean_average_precision(self.per_query_ap)

    def compare(self, baseline: "EvalReport", alpha: float = 0.05) -> Comparison | None:
        """Paired t-test over the queries both reports include; None with fewer than 2."""
        shared = sorted(set(self.per_query_ap) & set(baseline.per_query_ap))
        if len(shared) < 2:
            logger.warning("%s vs %s: fewer than 2 shared queries, no test", self.system, baseline.system)
            return None
        ours = {q: self.per_query_ap[q] for q in shared}
        theirs = {q: baseline.per_query_ap[q] for q in shared}
        result = paired_t_test(ours, theirs, alpha)
        return Comparison(
            system=self.system,
            baseline=baseline.system,
            system_map=mean_average_precision(ours),
            baseline_map=mean_average_precision(theirs),
            t=result.t,
            p=result.p,
            significant=result.significant,
            queries=len(shared),
        )


def cross_validate(
    system: "RankingSystem | ModelConfig",
    data: ExperimentData,
    fold_plan: FoldPlan,
    baselines: Mapping[str, EvalReport] | None = None,
    alpha: float = 0.05,
    train_config: TrainConfig | None = None,
    on_round: Callable[[FoldRound, "RankingSystem"], None] | None = None,
) -> EvalReport:
    """Fit on train folds, select on the validation fold, and rank the test fold, for every round.

    Test-fold APs are pooled over rounds into one report and compared with every
    baseline report given.
    """
    if isinstance(system, ModelConfig):
        system = NeuralSystem(system, train_config or data.config.train, data)
    missing = [q for q in fold_plan.query_ids if q not in data.candidates]
    if missing:
        raise ValueError(f"No candidate pool for queries {missing[:5]}")

    per_query: dict[str, float | None] = {}
    rankings: dict[str, ScoredList] = {}
    rounds: list[RoundResult] = []
    for fold in fold_plan.rounds():
        result = system.fit(fold.train, fold.validation)
        for qid in fold.test:
            rankings[qid] = system.rank(qid, data.candidates[qid])
        round_ap = query_average_precisions({qid: rankings[qid] for qid in fold.test}, data.qrels)
        per_query.update(round_ap)
        rounds.append(
            RoundResult(
                index=fold.index,
                test_queries=len(fold.test),
                test_map=mean_average_precision(round_ap),
                best_epoch=result.best_epoch if result is not None else None,
                val_map=result.best_val_map if result is not None else None,
            )
        )
        logger.info("%s round %d/%d: test MAP %.4f", system.name, fold.index + 1, fold_plan.k, rounds[-1].test_map)
        if on_round is not None:
            on_round(fold, system)

    excluded = sorted(q for q, ap in per_query.items() if ap is None)
    if excluded:
        logger.warning("%s: %d queries without relevant judgments excluded from MAP", system.name, len(excluded))
    report = EvalReport(
        system=system.name,
        per_query_ap={q: ap for q, ap in per_query.items() if ap is not None},
        excluded=excluded,
        rounds=rounds,
        rankings=rankings,
    )
    for baseline in (baselines or {}).values():
        comparison = report.compare(baseline, alpha)
        if comparison is not None:
            report.comparisons.append(comparison)
    logger.info("%s: MAP %.4f over %d queries", report.system, report.mean_ap, len(report.per_query_ap))
    return report


def significance_marker(comparison: Comparison) -> str:
    """'+' or '-' when significantly better or worse, '' otherwise."""
    if not comparison.significant or math.isnan(comparison.t):
        return ""
    return "+" if comparison.t > 0 else "-"
