"""Command line interface: ``simpleclir <command> [options]``.

Every command reads an experiment configuration (``--config`` file or ``--preset``,
then flag overrides), writes its outputs to the output directory and finishes with a
``manifest.json`` plus the effective ``config.yaml``, from which the run can be repeated.
"""

import argparse
import json
import os
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any
from urllib.parse import urlparse

import numpy as np
import pandas as pd
import requests

from simpleclir import __version__
from simpleclir.analysis.similarity import (
    exact_match_map_sweep,
    format_neighbor_table,
    neighbor_frame,
    neighbor_table,
    pair_similarity_distribution,
    summarize_distribution,
    threshold_sweep,
    write_distribution_csv,
    write_sweep_csv,
)
from simpleclir.evaluation.crossval import (
    BaselineSystem,
    EvalReport,
    FoldRound,
    NeuralSystem,
    cross_validate,
    kfold_split,
)
from simpleclir.evaluation.experiment import ExperimentData, load_experiment
from simpleclir.evaluation.metrics import query_average_precisions
from simpleclir.evaluation.reports import format_results_table, write_report_csv, write_results_csv
from simpleclir.evaluation.runs import entries_to_rankings, read_run, write_run
from simpleclir.matching.features import FeatureBuilder
from simpleclir.matching.rankers import build_ranker
from simpleclir.matching.training import load_checkpoint, rerank, save_checkpoint, train
from simpleclir.models.config import BASELINES, MODEL_VARIANTS, ExperimentConfig
from simpleclir.models.corpus import compute_stats, load_collection, load_qrels, load_queries
from simpleclir.models.embeddings import (
    CandidateIndex,
    EmbeddingTable,
    coverage_report,
    fetch_embeddings,
    load_embeddings,
)
from simpleclir.models.io import file_digest, resolve_path
from simpleclir.models.ranking import ScoredList
from simpleclir.models.synthetic import SyntheticConfig, generate_synthetic
from simpleclir.models.text import load_stopwords
from simpleclir.utils.logging import set_level, setup_logger

logger = setup_logger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

# Flag destinations that override a top-level ExperimentConfig field
EXPERIMENT_FLAGS = [
    "name",
    "collection",
    "queries",
    "qrels",
    "embeddings",
    "query_stopwords",
    "doc_stopwords",
    "mu",
    "k1",
    "b",
    "candidate_pool",
    "pool_depth",
    "variants",
    "baselines",
    "folds",
    "seed",
    "alpha",
    "pair_cap",
    "distribution_bins",
    "etas",
    "output_dir",
]

# Flag destinations that override a TrainConfig field
TRAIN_FLAGS = ["learning_rate", "batch_size", "max_epochs", "neg_per_pos", "margin"]


class RunContext:
    """Arguments, configuration and bookkeeping of one command invocation."""

    def __init__(self, command: str, args: argparse.Namespace, config: ExperimentConfig):
        self.command = command
        self.args = args
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.inputs: list[Path] = config_inputs(config)
        self.outputs: list[Path] = []

    def output(self, name: str) -> Path:
        """Path of an output file; recorded for the manifest."""
        path = self.output_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        self.outputs.append(path)
        return path

    def add_input(self, path: str | os.PathLike[str]) -> None:
        resolved = resolve_path(path)
        if resolved not in self.inputs:
            self.inputs.append(resolved)

    def write_manifest(self, argv: Sequence[str]) -> Path:
        """Write ``config.yaml`` and ``manifest.json`` (inputs and outputs with SHA-256 digests)."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.config.to_yaml(self.output_dir / "config.yaml")
        manifest: dict[str, Any] = {
            "command": self.command,
            "argv": list(argv),
            "version": __version__,
            "config": self.config.model_dump(mode="json"),
            "seeds": {
                "experiment": self.config.seed,
                "train": self.config.train.seed,
                "model": self.config.model.seed,
            },
            "inputs": {str(p): file_digest(p) for p in self.inputs if p.is_file()},
            "outputs": {
                str(p.relative_to(self.output_dir)): file_digest(p) for p in dict.fromkeys(self.outputs) if p.is_file()
            },
        }
        path = self.output_dir / "manifest.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
        logger.info("Wrote manifest to %s", path)
        return path


def config_inputs(config: ExperimentConfig) -> list[Path]:
    """Data files named by a configuration that exist on disk."""
    candidates = [config.collection, config.queries, config.qrels, *config.embeddings]
    # Stopword settings are either shipped language codes or file paths
    candidates += [config.query_stopwords, config.doc_stopwords]
    paths = []
    for value in candidates:
        if value is None:
            continue
        path = resolve_path(value)
        if path.is_file() and path not in paths:
            paths.append(path)
    return paths


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Configuration file or preset, then every flag given on the command line."""
    if args.config and args.preset:
        raise ValueError("Use either --config or --preset, not both")
    if args.config:
        base = ExperimentConfig.from_yaml(args.config)
    elif args.preset:
        base = ExperimentConfig.from_preset(args.preset)
    else:
        base = ExperimentConfig()

    data = base.model_dump(mode="json")
    for field in EXPERIMENT_FLAGS:
        value = getattr(args, field, None)
        if value is not None:
            data[field] = value
    for field in TRAIN_FLAGS:
        value = getattr(args, field, None)
        if value is not None:
            data["train"][field] = value
    if getattr(args, "train_seed", None) is not None:
        data["train"]["seed"] = args.train_seed
    if getattr(args, "model_seed", None) is not None:
        data["model"]["seed"] = args.model_seed
    return ExperimentConfig.model_validate(data)



def fetch_remote_embeddings(args: argparse.Namespace, config: ExperimentConfig) -> ExperimentConfig:
    """Download ``--embeddings-url`` files into ``--vectors-dir`` and append them to the embeddings."""
    urls = getattr(args, "embeddings_url", None)
    if not urls:
        return config
    paths = []
    for url in urls:
        name = Path(urlparse(url).path).name
        if not name:
            raise ValueError(f"Cannot name a vector file after URL '{url}'")
        paths.append(str(fetch_embeddings(url, Path(args.vectors_dir) / name)))
    data = config.model_dump(mode="json")
    data["embeddings"] = [*config.embeddings, *paths]
    return ExperimentConfig.model_validate(data)


def _report_of(system: str, rankings: dict[str, ScoredList], data: ExperimentData) -> EvalReport:
    per_query = query_average_precisions(rankings, data.qrels)
    return EvalReport(
        system=system,
        per_query_ap={q: ap for q, ap in per_query.items() if ap is not None},
        excluded=sorted(q for q, ap in per_query.items() if ap is None),
        rankings=rankings,
    )


def run_index(ctx: RunContext) -> None:
    """Preprocess the collection and write per-term statistics."""
    config = ctx.config
    path = config.resolved("collection")
    if path is None:
        raise ValueError("index needs a collection (--collection or a configuration)")
    collection, vocabulary = load_collection(
        path,
        load_stopwords(config.doc_stopwords),
        truncation_limit=config.truncation_limit,
        truncate_after_stopwords=config.truncate_after_stopwords,
    )
    stats = compute_stats(collection)
    terms = pd.DataFrame(
        {
            "term": list(vocabulary.terms),
            "df": stats.doc_freq,
            "cf": stats.collection_freq,
            "idf": stats.idf,
        }
    )
    terms.to_csv(ctx.output("terms.csv"), index=False, float_format="%.6f")

    summary: dict[str, Any] = {
        "documents": stats.doc_count,
        "vocabulary": len(vocabulary),
        "tokens": stats.total_tokens,
        "avg_doc_len": stats.avg_doc_len,
    }
    if config.queries is not None:
        queries = load_queries(config.resolved("queries"), load_stopwords(config.query_stopwords))
        summary["queries"] = len(queries)
        summary["empty_queries"] = sum(1 for q in queries.queries if q.is_empty)
        if config.embeddings:
            wanted = set(vocabulary.terms) | set(queries.vocabulary.terms)
            table = _load_table(config.embeddings, wanted, config)
            summary["coverage"] = {
                "query": coverage_report(table, queries.vocabulary).model_dump(),
                "document": coverage_report(table, vocabulary).model_dump(),
            }
    with open(ctx.output("index.json"), "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
    logger.info("Indexed %d documents, %d terms", stats.doc_count, len(vocabulary))


def _load_table(paths: Sequence[str], wanted: set[str] | None, config: ExperimentConfig) -> EmbeddingTable:
    table: EmbeddingTable | None = None
    for path in paths:
        loaded = load_embeddings(path, wanted, config.source_lang, config.target_lang)
        table = loaded if table is None else table.merged(loaded)
    if table is None:
        raise ValueError("No embedding files given (--embeddings or a configuration)")
    return table


def run_rank_unsup(ctx: RunContext) -> None:
    """Rank with the unsupervised baselines and write one run file per method."""
    data = load_experiment(ctx.config)
    methods = ctx.args.methods or ctx.config.baselines
    reports = []
    for method in methods:
        rankings = {}
        for qid in data.query_ids:
            candidates = data.candidates[qid] if ctx.args.pool == "candidates" else None
            rankings[qid] = data.retriever.rank(method, qid, data.query_terms(qid), candidates, depth=ctx.args.depth)
        write_run(ctx.output(f"runs/{method}.run"), rankings, tag=f"{ctx.config.name}-{method}")
        report = _report_of(method, rankings, data)
        logger.info("%s: MAP %.4f over %d queries", method, report.mean_ap, len(report.per_query_ap))
        reports.append(report)

    if any(m.startswith("TbT-QT") for m in methods):
        rows = []
        for qid in data.query_ids:
            translated = data.retriever.translate(qid, data.query_terms(qid))
            for source, target, similarity in zip(
                translated.original, translated.translated, translated.similarity, strict=True
            ):
                rows.append({"query": qid, "term": source, "translation": target, "similarity": similarity})
        pd.DataFrame(rows, columns=["query", "term", "translation", "similarity"]).to_csv(
            ctx.output("translations.csv"), index=False
        )

    write_report_csv(ctx.output("report.csv"), reports)
    print(format_results_table(reports))


def run_train(ctx: RunContext) -> None:
    """Train one variant on the train folds of a cross-validation round and save a checkpoint."""
    config, args = ctx.config, ctx.args
    data = load_experiment(config)
    fold = kfold_split(data.query_ids, config.folds, config.seed).round(args.round)
    model_config = config.model_config_for(args.variant)
    ranker = build_ranker(model_config)
    builder = FeatureBuilder(model_config, data.table, data.collection, data.stats, data.queries, data.translator)
    result = train(
        ranker,
        builder,
        data.qrels,
        fold.train,
        fold.validation,
        config.train,
        candidates=data.candidates,
        track_train_map=args.track_train_map,
    )
    save_checkpoint(
        ctx.output(f"{args.variant}.npz"),
        ranker,
        config.train,
        extra={
            "experiment": config.name,
            "round": fold.index,
            "folds": config.folds,
            "best_epoch": result.best_epoch,
            "train_queries": fold.train,
            "validation_queries": fold.validation,
            "test_queries": fold.test,
        },
    )
    frame = pd.DataFrame([e.model_dump() for e in result.epochs])
    frame.to_csv(ctx.output(f"{args.variant}.epochs.csv"), index=False)
    logger.info(
        "%s: best epoch %d, validation MAP %s, training MAP %.4f",
        args.variant,
        result.best_epoch,
        "n/a" if result.best_val_map is None else f"{result.best_val_map:.4f}",
        result.train_map,
    )


def run_rerank(ctx: RunContext) -> None:
    """Rerank candidate pools with a saved checkpoint."""
    args = ctx.args
    ctx.add_input(args.checkpoint)
    checkpoint = load_checkpoint(resolve_path(args.checkpoint))
    data = load_experiment(ctx.config)
    ranker = checkpoint.ranker
    builder = FeatureBuilder(ranker.config, data.table, data.collection, data.stats, data.queries, data.translator)

    query_ids = data.query_ids
    if not args.all_queries and "test_queries" in checkpoint.extra:
        query_ids = [q for q in checkpoint.extra["test_queries"] if q in data.candidates]
    rankings = {qid: rerank(ranker, builder, qid, data.candidates[qid]) for qid in query_ids}
    variant = ranker.config.variant
    write_run(ctx.output(f"runs/{variant}.run"), rankings, tag=f"{ctx.config.name}-{variant}")
    report = _report_of(variant, rankings, data)
    logger.info("%s: MAP %.4f over %d queries", variant, report.mean_ap, len(report.per_query_ap))
    write_report_csv(ctx.output("report.csv"), [report])


def run_evaluate(ctx: RunContext) -> None:
    """Per-query AP and MAP of run files, tested against a baseline run."""
    path = ctx.config.resolved("qrels")
    if path is None:
        raise ValueError("evaluate needs qrels (--qrels or a configuration)")
    qrels = load_qrels(path)
    judged = set(qrels.query_ids)
    reports = []
    for run_path in ctx.args.runs:
        ctx.add_input(run_path)
        rankings = entries_to_rankings(read_run(resolve_path(run_path)))
        missing = [q for q in sorted(judged) if q not in rankings and qrels.relevant(q)]
        if missing:
            logger.warning("%s: %d judged queries have no ranking and are skipped", run_path, len(missing))
        per_query = query_average_precisions({q: r for q, r in rankings.items() if q in judged}, qrels)
        reports.append(
            EvalReport(
                system=Path(run_path).stem,
                per_query_ap={q: ap for q, ap in per_query.items() if ap is not None},
                excluded=sorted(q for q, ap in per_query.items() if ap is None),
            )
        )

    names = [r.system for r in reports]
    baseline_name = ctx.args.baseline or names[0]
    if baseline_name not in names:
        raise ValueError(f"Baseline run '{baseline_name}' is not among {names}")
    baseline = reports[names.index(baseline_name)]
    for report in reports:
        if report is not baseline:
            comparison = report.compare(baseline, ctx.config.alpha)
            if comparison is not None:
                report.comparisons.append(comparison)

    write_report_csv(ctx.output("report.csv"), reports)
    write_results_csv(ctx.output("results.csv"), reports)
    print(format_results_table(reports))


def run_cv(ctx: RunContext) -> None:
    """k-fold cross-validation of the baselines and the neural variants."""
    config, args = ctx.config, ctx.args
    data = load_experiment(config)
    fold_plan = kfold_split(data.query_ids, config.folds, config.seed)
    with open(ctx.output("folds.json"), "w", encoding="utf-8") as f:
        json.dump(fold_plan.model_dump(), f, indent=2)

    baselines = {}
    for name in config.baselines:
        baselines[name] = cross_validate(BaselineSystem(name, data), data, fold_plan, alpha=config.alpha)

    def keep_checkpoint(fold: FoldRound, system: NeuralSystem) -> None:
        save_checkpoint(
            ctx.output(f"checkpoints/{system.name}.round{fold.index}.npz"),
            system.ranker,
            config.train,
            extra={"experiment": config.name, "round": fold.index, "test_queries": fold.test},
        )

    reports = list(baselines.values())
    for variant in config.variants:
        reports.append(
            cross_validate(
                config.model_config_for(variant),
                data,
                fold_plan,
                baselines=baselines,
                alpha=config.alpha,
                train_config=config.train,
                on_round=keep_checkpoint if args.save_checkpoints else None,
            )
        )

    for report in reports:
        write_run(ctx.output(f"runs/{report.system}.run"), report.rankings, tag=f"{config.name}-{report.system}")
    rounds = pd.DataFrame(
        [{"system": r.system, **round_.model_dump()} for r in reports for round_ in r.rounds],
        columns=["system", "index", "test_queries", "test_map", "best_epoch", "val_map"],
    )
    rounds.to_csv(ctx.output("rounds.csv"), index=False)
    write_report_csv(ctx.output("report.csv"), reports)
    write_results_csv(ctx.output("results.csv"), reports)
    table = format_results_table(reports)
    ctx.output("results.txt").write_text(table + "\n", encoding="utf-8")
    print(table)


def run_analyze_dist(ctx: RunContext) -> None:
    """Pair-similarity distribution, its summary and the exact-match threshold sweep."""
    config, args = ctx.config, ctx.args
    data = load_experiment(config)
    distribution = pair_similarity_distribution(
        data.queries.vocabulary,
        data.collection.vocabulary,
        data.table,
        bin_count=config.distribution_bins,
        sampling_cap=config.pair_cap,
        seed=config.seed,
    )
    summary = summarize_distribution(distribution, args.threshold)
    etas = sorted(config.etas)
    map_at_eta = None
    if args.with_map:
        fold_plan = kfold_split(data.query_ids, config.folds, config.seed)
        map_at_eta = exact_match_map_sweep(data, etas, fold_plan, config.train)
    sweep = threshold_sweep(distribution, etas, map_at_eta)

    write_distribution_csv(ctx.output("distribution.csv"), distribution)
    write_sweep_csv(ctx.output("sweep.csv"), sweep)
    with open(ctx.output("summary.json"), "w", encoding="utf-8") as f:
        json.dump({**summary.model_dump(), "total_pairs": distribution.total_pairs, "sampled": distribution.sampled}, f)
    print(
        f"pairs={summary.pairs} mean={summary.mean:.4f} std={summary.std:.4f} "
        f"skewness={summary.skewness:.4f} above {summary.threshold}={summary.fraction_above:.4f}"
    )


def run_neighbors(ctx: RunContext) -> None:
    """Top-k translation candidates of some terms."""
    config, args = ctx.config, ctx.args
    terms = list(args.terms)
    source_paths = [args.source_vectors] if args.source_vectors else config.embeddings
    if not source_paths:
        raise ValueError("neighbors needs vectors (--source-vectors, --embeddings or a configuration)")

    if args.target_vectors:
        ctx.add_input(args.target_vectors)
        if args.source_vectors:
            ctx.add_input(args.source_vectors)
        source = _load_table(source_paths, set(terms), config)
        target = load_embeddings(
            args.target_vectors, None, config.source_lang, config.target_lang, np.float32, args.max_rows
        )
        index = CandidateIndex(target, target.terms)
    else:
        path = config.resolved("collection")
        if path is None:
            raise ValueError("neighbors needs --target-vectors or a collection to draw candidates from")
        _, vocabulary = load_collection(
            path,
            load_stopwords(config.doc_stopwords),
            truncation_limit=config.truncation_limit,
            truncate_after_stopwords=config.truncate_after_stopwords,
        )
        source = _load_table(source_paths, set(terms) | set(vocabulary.terms), config)
        index = CandidateIndex(source, vocabulary.terms)

    rows = neighbor_table(terms, args.k, source, index, exclude_self=args.exclude_self)
    neighbor_frame(rows).to_csv(ctx.output("neighbors.csv"), index=False)
    print(format_neighbor_table(rows))


def run_synth(ctx: RunContext) -> None:
    """Generate the synthetic two-language collection."""
    args = ctx.args
    overrides = {
        field: getattr(args, field)
        for field in ("n_docs", "n_queries", "dimension", "noise")
        if getattr(args, field) is not None
    }
    if args.synth_seed is not None:
        overrides["seed"] = args.synth_seed
    paths = generate_synthetic(ctx.output_dir, SyntheticConfig(**overrides))
    ctx.outputs.extend(paths.values())


def _shared_options() -> argparse.ArgumentParser:
    """Options understood by every command."""
    shared = argparse.ArgumentParser(add_help=False)
    group = shared.add_argument_group("configuration")
    group.add_argument("--config", help="YAML experiment configuration")
    group.add_argument("--preset", help="Name of a shipped preset (e.g. clef, synthetic)")
    group.add_argument("--log-level", default="INFO", choices=LOG_LEVELS, type=str.upper, help="Logging level")
    group.add_argument("-o", "--output-dir", dest="output_dir", help="Directory for outputs and the manifest")
    group.add_argument("--name", help="Experiment name, used as run tag")
    group.add_argument("--seed", type=int, help="Seed of fold splits and pair sampling")

    data = shared.add_argument_group("data")
    data.add_argument("--collection", help="Collection file (docId<TAB>text)")
    data.add_argument("--queries", help="Query file (queryId<TAB>title)")
    data.add_argument("--qrels", help="TREC qrels file")
    data.add_argument("--embeddings", nargs="+", help="Aligned vector files (word2vec text format)")
    data.add_argument(
        "--embeddings-url",
        nargs="+",
        help="Aligned vector files to download (cached) and add to the embeddings",
    )
    data.add_argument(
        "--vectors-dir",
        default="vectors",
        help="Download directory of --embeddings-url, relative to $SIMPLECLIR_DATA_DIR (default: vectors)",
    )
    data.add_argument("--query-stopwords", help="Language code or stopword file of the queries")
    data.add_argument("--doc-stopwords", help="Language code or stopword file of the documents")

    retrieval = shared.add_argument_group("retrieval")
    retrieval.add_argument("--mu", type=float, help="Dirichlet prior of query likelihood")
    retrieval.add_argument("--k1", type=float, help="BM25 k1")
    retrieval.add_argument("--b", type=float, help="BM25 b")
    retrieval.add_argument("--candidate-pool", choices=["judged", "bm25"], help="Documents reranked per query")
    retrieval.add_argument("--pool-depth", type=int, help="Depth of the bm25 candidate pool")

    training = shared.add_argument_group("training")
    training.add_argument("--variants", nargs="+", choices=MODEL_VARIANTS, help="Neural variants to run")
    training.add_argument("--baselines", nargs="+", choices=BASELINES, help="Baselines to run and test against")
    training.add_argument("--folds", type=int, help="Cross-validation folds")
    training.add_argument("--alpha", type=float, help="Significance level")
    training.add_argument("--learning-rate", type=float)
    training.add_argument("--batch-size", type=int)
    training.add_argument("--max-epochs", type=int)
    training.add_argument("--neg-per-pos", type=int, help="Negatives sampled per relevant document")
    training.add_argument("--margin", type=float, help="Hinge loss margin")
    training.add_argument("--train-seed", type=int, help="Seed of negative sampling and batch order")
    training.add_argument("--model-seed", type=int, help="Seed of parameter initialization")

    analysis = shared.add_argument_group("analysis")
    analysis.add_argument("--pair-cap", type=int, help="Maximum number of word pairs in a distribution")
    analysis.add_argument("--distribution-bins", type=int, help="Histogram bins over [-1, 1]")
    analysis.add_argument("--etas", type=float, nargs="+", help="Exact-match thresholds of the sweep")
    return shared


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_options()
    parser = argparse.ArgumentParser(prog="simpleclir", description="Cross-lingual retrieval experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name: str, handler: Callable[[RunContext], None], help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[shared], help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        return sub

    add("index", run_index, "Preprocess the collection and write term statistics")

    sub = add("rank-unsup", run_rank_unsup, "Rank with the unsupervised baselines")
    sub.add_argument("--methods", nargs="+", choices=BASELINES, help="Baselines to run (default: configuration)")
    sub.add_argument(
        "--pool",
        choices=["collection", "candidates"],
        default="collection",
        help="Rank the whole collection or only the candidate pools",
    )
    sub.add_argument("--depth", type=int, default=1000, help="Documents kept per query")

    sub = add("train", run_train, "Train one neural variant on a cross-validation round")
    sub.add_argument("--variant", required=True, choices=MODEL_VARIANTS)
    sub.add_argument("--round", type=int, default=0, help="Cross-validation round (test fold index)")
    sub.add_argument("--track-train-map", action="store_true", help="Log training MAP after every epoch")

    sub = add("rerank", run_rerank, "Rerank candidate pools with a trained checkpoint")
    sub.add_argument("--checkpoint", required=True, help="Checkpoint written by 'train'")
    sub.add_argument("--all-queries", action="store_true", help="Rerank every query, not just the test fold")

    sub = add("evaluate", run_evaluate, "Score run files against qrels and test them against a baseline")
    sub.add_argument("--runs", nargs="+", required=True, help="TREC run files")
    sub.add_argument("--baseline", help="Run (file stem) the others are tested against; default the first")

    sub = add("cv", run_cv, "Cross-validate baselines and neural variants")
    sub.add_argument("--save-checkpoints", action="store_true", help="Keep the ranker of every round")

    sub = add("analyze-dist", run_analyze_dist, "Word-pair similarity distribution and threshold sweep")
    sub.add_argument("--threshold", type=float, default=0.4, help="Threshold of the summary mass")
    sub.add_argument("--with-map", action="store_true", help="Cross-validate MP-Exact at every eta")

    sub = add("neighbors", run_neighbors, "Nearest translation candidates of terms")
    sub.add_argument("--terms", nargs="+", required=True)
    sub.add_argument("-k", type=int, default=5, help="Neighbors per term")
    sub.add_argument("--source-vectors", help="Vectors of the terms (default: --embeddings)")
    sub.add_argument("--target-vectors", help="Candidate vectors (default: the collection vocabulary)")
    sub.add_argument("--max-rows", type=int, help="Read at most this many candidate vectors")
    sub.add_argument("--exclude-self", action="store_true", help="Skip candidates spelled like the term")

    sub = add("synth", run_synth, "Generate the synthetic two-language collection")
    sub.add_argument("--n-docs", type=int)
    sub.add_argument("--n-queries", type=int)
    sub.add_argument("--dimension", type=int)
    sub.add_argument("--noise", type=float)
    sub.add_argument("--synth-seed", type=int, help="Seed of the generator")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run a command; returns 0 on success and 1 on bad input (usage errors exit with 2)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    set_level(args.log_level)
    if args.command == "synth" and args.output_dir is None:
        args.output_dir = "synthetic"

    try:
        config = fetch_remote_embeddings(args, build_config(args))
        ctx = RunContext(args.command, args, config)
        args.handler(ctx)
        ctx.write_manifest(argv)
    except (ValueError, FileNotFoundError, requests.RequestException) as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
