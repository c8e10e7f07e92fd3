"""Pairwise hinge-loss training, reranking and checkpoints for the neural rankers."""

import json
import os
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from simpleclir.evaluation.metrics import mean_average_precision, trec_average_precisions
from simpleclir.matching.autodiff import ModelParams, Tensor, hinge, mul
from simpleclir.matching.features import FeatureBuilder
from simpleclir.matching.rankers import Ranker, build_ranker
from simpleclir.models.config import ModelConfig, TrainConfig
from simpleclir.models.corpus import Qrels
from simpleclir.models.ranking import ScoredList
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)

CHECKPOINT_VERSION = 1


def hinge_loss(s_pos: "Tensor | float", s_neg: "Tensor | float", margin: float = 1.0) -> "Tensor | float":
    """max(0, margin - s_pos + s_neg); plain floats in, plain float out."""
    if isinstance(s_pos, Tensor) or isinstance(s_neg, Tensor):
        return hinge(s_pos, s_neg, margin)
    return max(0.0, margin - float(s_pos) + float(s_neg))


class AdamState:
    """First and second moment estimates per parameter name."""

    def __init__(self) -> None:
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}


def adam_step(
    values: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    t: int,
    config: TrainConfig,
) -> dict[str, np.ndarray]:
    """One bias-corrected Adam update; returns new parameter arrays and updates ``state``."""
    if t < 1:
        raise ValueError("Adam steps are counted from t = 1")
    beta1, beta2 = config.beta1, config.beta2
    updated = {}
    for name, value in values.items():
        grad = grads[name]
        m = beta1 * state.m.get(name, np.zeros_like(value)) + (1.0 - beta1) * grad
        v = beta2 * state.v.get(name, np.zeros_like(value)) + (1.0 - beta2) * grad**2
        state.m[name], state.v[name] = m, v
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        updated[name] = value - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    state.t = t
    return updated


class Adam:
    """Adam optimizer bound to a ranker's parameters."""

    def __init__(self, params: ModelParams, config: TrainConfig):
        self.params = params
        self.config = config
        self.state = AdamState()

    def step(self) -> None:
        values = {name: tensor.values for name, tensor in self.params.items()}
        updated = adam_step(values, self.params.grads(), self.state, self.state.t + 1, self.config)
        for name, tensor in self.params.items():
            tensor.values = updated[name]


class Triple(BaseModel):
    """A (query, relevant document, non-relevant document) training example."""

    model_config = ConfigDict(frozen=True)

    query_id: str
    pos_doc_id: str
    neg_doc_id: str

    @model_validator(mode="after")
    def validate_distinct(self) -> "Triple":
        if self.pos_doc_id == self.neg_doc_id:
            raise ValueError("Positive and negative documents must differ")
        return self


def sample_triples(
    qrels: Qrels,
    train_queries: Iterable[str],
    neg_per_pos: int = 5,
    seed: int = 42,
    epoch: int = 0,
) -> list[Triple]:
    """Pair every relevant document with ``neg_per_pos`` judged non-relevant ones.

    Negatives are drawn without replacement when enough exist and with replacement
    otherwise. The draw depends only on (seed, epoch).
    """
    if neg_per_pos < 1:
        raise ValueError("neg_per_pos must be >= 1")
    rng = np.random.default_rng([seed, epoch])
    triples: list[Triple] = []
    for query_id in sorted(set(train_queries)):
        positives = sorted(qrels.relevant(query_id))
        negatives = qrels.non_relevant(query_id)
        if not positives:
            logger.debug("Query '%s' has no relevant documents; no triples", query_id)
            continue
        if not negatives:
            if epoch == 0:
                logger.warning("Query '%s' has no judged non-relevant documents and is skipped", query_id)
            continue
        replace = len(negatives) < neg_per_pos
        for pos in positives:
            for i in rng.choice(len(negatives), size=neg_per_pos, replace=replace):
                triples.append(Triple(query_id=query_id, pos_doc_id=pos, neg_doc_id=negatives[int(i)]))
    return triples


class EpochLog(BaseModel):
    """Summary of one training epoch."""

    epoch: int = Field(..., ge=1)
    loss: float = Field(..., ge=0.0, description="Mean hinge loss over the epoch's triples")
    triples: int = Field(..., ge=0)
    train_map: float | None = None
    val_map: float | None = None


class TrainResult(BaseModel):
    """Epoch log and the selected epoch; the ranker holds the selected parameters."""

    epochs: list[EpochLog]
    best_epoch: int
    best_val_map: float | None = None
    train_map: float | None = Field(None, description="Training MAP with the selected parameters")

    @property
    def losses(self) -> list[float]:
        return [e.loss for e in self.epochs]


def judged_candidates(qrels: Qrels, query_ids: Iterable[str]) -> dict[str, list[str]]:
    """The judged documents of every query, the default rerank pool."""
    return {qid: qrels.judged(qid) for qid in query_ids}


def rerank(ranker: Ranker, builder: FeatureBuilder, query_id: str, candidates: Iterable[str]) -> ScoredList:
    """Score every candidate document; ties fall back to docId order."""
    scores = {doc_id: ranker.score(builder.build(query_id, doc_id)) for doc_id in candidates}
    return ScoredList.from_scores(query_id, scores)


def evaluate_map(
    ranker: Ranker,
    builder: FeatureBuilder,
    qrels: Qrels,
    query_ids: Sequence[str],
    candidates: Mapping[str, Sequence[str]],
) -> tuple[float, dict[str, float | None]]:
    """MAP and per-query AP of reranked candidate pools."""
    per_query = trec_average_precisions(
        {qid: rerank(ranker, builder, qid, candidates[qid]).doc_ids for qid in query_ids},
        {qid: qrels.relevant(qid) for qid in query_ids},
    )
    return mean_average_precision(per_query), per_query


def train(
    ranker: Ranker,
    builder: FeatureBuilder,
    qrels: Qrels,
    train_queries: Sequence[str],
    val_queries: Sequence[str],
    config: TrainConfig | None = None,
    candidates: Mapping[str, Sequence[str]] | None = None,
    track_train_map: bool = False,
) -> TrainResult:
    """Mini-batch hinge-loss training with Adam, keeping the best-validation epoch.

    Triples are resampled every epoch. After each epoch the validation queries are
    reranked; the parameters of the first epoch with the highest validation MAP are
    restored at the end. Without validation queries the last epoch is kept.
    """
    config = config or TrainConfig()
    train_queries, val_queries = sorted(set(train_queries)), sorted(set(val_queries))
    overlap = set(train_queries) & set(val_queries)
    if overlap:
        raise ValueError(f"Train and validation queries overlap: {sorted(overlap)[:5]}")
    if candidates is None:
        candidates = judged_candidates(qrels, [*train_queries, *val_queries])
    if not val_queries:
        logger.warning("No validation queries; keeping the parameters of the last epoch")

    optimizer = Adam(ranker.params, config)
    epochs: list[EpochLog] = []
    best_epoch, best_val, best_state = 0, -1.0, ranker.params.state()

    for epoch in range(1, config.max_epochs + 1):
        triples = sample_triples(qrels, train_queries, config.neg_per_pos, config.seed, epoch - 1)
        if not triples:
            raise ValueError("No training triples: every training query lacks relevant or non-relevant documents")
        order = np.random.default_rng([config.seed, epoch - 1, 1]).permutation(len(triples))

        loss_sum = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [triples[i] for i in order[start : start + config.batch_size]]
            ranker.params.zero_grad()
            batch_loss = 0.0
            for triple in batch:
                s_pos = ranker.forward(builder.build(triple.query_id, triple.pos_doc_id))
                s_neg = ranker.forward(builder.build(triple.query_id, triple.neg_doc_id))
                loss = hinge(s_pos, s_neg, config.margin)
                mul(loss, 1.0 / len(batch)).backward()
                batch_loss += loss.item()
            optimizer.step()
            loss_sum += batch_loss
            logger.debug("epoch %d batch %d loss %.6f", epoch, start // config.batch_size + 1, batch_loss / len(batch))

        train_map = evaluate_map(ranker, builder, qrels, train_queries, candidates)[0] if track_train_map else None
        val_map = evaluate_map(ranker, builder, qrels, val_queries, candidates)[0] if val_queries else None
        log = EpochLog(
            epoch=epoch, loss=loss_sum / len(triples), triples=len(triples), train_map=train_map, val_map=val_map
        )
        epochs.append(log)
        logger.info(
            "%s epoch %d: loss %.4f%s%s",
            ranker.config.variant,
            epoch,
            log.loss,
            "" if train_map is None else f", train MAP {train_map:.4f}",
            "" if val_map is None else f", val MAP {val_map:.4f}",
        )
        if val_map is None or val_map > best_val:
            best_epoch, best_val, best_state = epoch, -1.0 if val_map is None else val_map, ranker.params.state()

    ranker.params.load_state(best_state)
    final_train_map = evaluate_map(ranker, builder, qrels, train_queries, candidates)[0]
    return TrainResult(
        epochs=epochs,
        best_epoch=best_epoch,
        best_val_map=best_val if val_queries else None,
        train_map=final_train_map,
    )


class Checkpoint(BaseModel):
    """A ranker restored from disk with the settings it was trained with."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    ranker: Ranker
    train_config: TrainConfig | None = None
    extra: dict[str, Any] = Field(default_factory=dict)


def save_checkpoint(
    path: str | os.PathLike[str],
    ranker: Ranker,
    train_config: TrainConfig | None = None,
    extra: Mapping[str, Any] | None = None,
) -> Path:
    """Write named parameter arrays and configuration metadata to an ``.npz`` file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "format_version": CHECKPOINT_VERSION,
        "model": ranker.config.model_dump(mode="json", exclude={"variant"}),
        "train": train_config.model_dump(mode="json") if train_config is not None else None,
        "extra": dict(extra or {}),
    }
    arrays = {f"param/{name}": tensor.values for name, tensor in ranker.params.items()}
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)
    logger.info("Saved %s checkpoint to %s", ranker.config.variant, path)
    return path


def load_checkpoint(path: str | os.PathLike[str]) -> Checkpoint:
    """Rebuild a ranker from ``save_checkpoint`` output; parameters are restored bit-exactly."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    with np.load(path, allow_pickle=False) as data:
        if "meta" not in data.files:
            raise ValueError(f"{path} is not a checkpoint (no metadata)")
        meta = json.loads(data["meta"].item())
        if meta.get("format_version") != CHECKPOINT_VERSION:
            raise ValueError(f"Unsupported checkpoint version {meta.get('format_version')!r} in {path}")
        state = {key.removeprefix("param/"): data[key] for key in data.files if key.startswith("param/")}
    ranker = build_ranker(ModelConfig.model_validate(meta["model"]))
    ranker.params.load_state(state)
    train_config = TrainConfig.model_validate(meta["train"]) if meta["train"] is not None else None
    return Checkpoint(ranker=ranker, train_config=train_config, extra=meta["extra"])
