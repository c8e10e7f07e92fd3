"""End-to-end checks on the full-size synthetic collection (run with ``-m slow``)."""

import json
import time

import pandas as pd
import pytest

from simpleclir.cli import main
from simpleclir.evaluation.crossval import kfold_split
from simpleclir.evaluation.experiment import load_experiment
from simpleclir.matching.features import FeatureBuilder
from simpleclir.matching.rankers import build_ranker
from simpleclir.matching.training import train
from simpleclir.models.config import MODEL_VARIANTS, ExperimentConfig, TrainConfig
from simpleclir.models.synthetic import SyntheticConfig, generate_synthetic

pytestmark = pytest.mark.slow

CV_SECONDS = 600


@pytest.fixture(scope="module")
def preset(tmp_path_factory):
    """Experiment configuration of the default synthetic collection."""
    return generate_synthetic(tmp_path_factory.mktemp("synthetic"), SyntheticConfig())["preset"]


@pytest.fixture(scope="module")
def data(preset):
    return load_experiment(ExperimentConfig.from_yaml(preset))


@pytest.fixture(scope="module")
def fold_plan(data):
    return kfold_split(data.query_ids, 5, data.config.seed)


@pytest.fixture(scope="module")
def cv_runs(tmp_path_factory, preset):
    """Two timed runs of the 5-fold ``cv`` command with the preset's defaults."""
    runs = []
    for name in ("first", "second"):
        out = tmp_path_factory.mktemp(f"cv-{name}")
        start = time.perf_counter()
        assert main(["cv", "--config", str(preset), "-o", str(out), "--folds", "5"]) == 0
        runs.append((out, time.perf_counter() - start))
    return runs


@pytest.mark.parametrize("variant", MODEL_VARIANTS)
def test_training_fits_planted_relevance(data, fold_plan, variant):
    """Every neural variant separates the training queries within 20 epochs at the default settings."""
    fold = fold_plan.round(0)
    model_config = data.config.model_config_for(variant)
    builder = FeatureBuilder(model_config, data.table, data.collection, data.stats, data.queries, data.translator)
    train_config = TrainConfig()
    assert train_config.max_epochs == 20
    result = train(build_ranker(model_config), builder, data.qrels, fold.train, [], train_config, candidates=data.candidates)
    assert result.train_map >= 0.95


def test_cv_pipeline_is_fast_and_reproducible(cv_runs):
    """The full pipeline finishes within ten minutes and repeats byte for byte."""
    digests = []
    for out, seconds in cv_runs:
        assert seconds < CV_SECONDS
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        digests.append(manifest["outputs"])
    assert digests[0] == digests[1]
    assert {"results.csv", "report.csv", "folds.json", "runs/MP-Cosine.run"} <= set(digests[0])


def test_neural_models_beat_translation_baseline(cv_runs):
    """Soft matching recovers the relevant documents a single translation misses."""
    out, _ = cv_runs[0]
    results = pd.read_csv(out / "results.csv", index_col="system")
    for variant in ("MP-Cosine", "DRMM-Cosine", "KNRM-Cosine"):
        assert results.loc[variant, "MAP"] > results.loc["TbT-QT-QL", "MAP"], variant
    report = pd.read_csv(out / "report.csv")
    assert len(report[(report["system"] == "MP-Cosine") & (report["query"] != "all")]) == 40
