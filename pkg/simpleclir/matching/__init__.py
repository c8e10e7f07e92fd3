"""Interaction features, the autodiff core, neural rankers and their training."""

from simpleclir.matching.features import FeatureBuilder, PairFeatures
from simpleclir.matching.interaction import (
    HistogramFeatures,
    InteractionMatrix,
    KernelFeatures,
    MatrixKind,
    build_histogram,
    build_matrix,
    dump_matrix,
    indicator,
    kernel_pool,
)
from simpleclir.matching.rankers import DRMM, KNRM, MatchPyramid, MatchPyramidHybrid, Ranker, build_ranker
from simpleclir.matching.training import (
    Checkpoint,
    EpochLog,
    TrainResult,
    Triple,
    adam_step,
    hinge_loss,
    load_checkpoint,
    rerank,
    sample_triples,
    save_checkpoint,
    train,
)

__all__ = [
    "DRMM",
    "KNRM",
    "Checkpoint",
    "EpochLog",
    "FeatureBuilder",
    "HistogramFeatures",
    "InteractionMatrix",
    "KernelFeatures",
    "MatchPyramid",
    "MatchPyramidHybrid",
    "MatrixKind",
    "PairFeatures",
    "Ranker",
    "TrainResult",
    "Triple",
    "adam_step",
    "build_histogram",
    "build_matrix",
    "build_ranker",
    "dump_matrix",
    "hinge_loss",
    "indicator",
    "kernel_pool",
    "load_checkpoint",
    "rerank",
    "sample_triples",
    "save_checkpoint",
    "train",
]
