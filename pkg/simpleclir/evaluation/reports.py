"""Tabular views of evaluation reports."""

import os
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from simpleclir.evaluation.crossval import EvalReport, significance_marker
from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)

SUMMARY_QUERY = "all"


def report_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    """Long table ``system, query, ap``; each system ends with an ``all`` row holding its MAP."""
    rows = []
    for report in reports:
        for query_id in sorted(report.per_query_ap):
            rows.append({"system": report.system, "query": query_id, "ap": report.per_query_ap[query_id]})
        rows.append({"system": report.system, "query": SUMMARY_QUERY, "ap": report.mean_ap})
    return pd.DataFrame(rows, columns=["system", "query", "ap"])


def results_table(reports: Sequence[EvalReport]) -> pd.DataFrame:
    """One row per system: MAP, queries, and a marker and p-value per baseline compared against.

    Markers are ``+`` (significantly better) and ``-`` (significantly worse).
    """
    baselines = list(dict.fromkeys(c.baseline for r in reports for c in r.comparisons))
    rows = []
    for report in reports:
        row: dict[str, object] = {
            "system": report.system,
            "MAP": round(report.mean_ap, 4),
            "queries": len(report.per_query_ap),
        }
        by_baseline = {c.baseline: c for c in report.comparisons}
        for name in baselines:
            comparison = by_baseline.get(name)
            row[f"vs {name}"] = significance_marker(comparison) if comparison else ""
            row[f"p {name}"] = round(comparison.p, 4) if comparison else None
        rows.append(row)
    return pd.DataFrame(rows).set_index("system")


def format_results_table(reports: Sequence[EvalReport]) -> str:
    return results_table(reports).to_string(na_rep="")


def write_report_csv(path: str | os.PathLike[str], reports: Sequence[EvalReport]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report_frame(reports).to_csv(path, index=False, float_format="%.6f")
    logger.info("Wrote per-query AP for %d systems to %s", len(reports), path)
    return path


def write_results_csv(path: str | os.PathLike[str], reports: Sequence[EvalReport]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    results_table(reports).to_csv(path)
    return path
