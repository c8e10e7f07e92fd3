"""Metrics, run files and significance testing.

Cross-validation lives in ``simpleclir.evaluation.crossval`` and depends on the
neural rankers; import it from there.
"""

from simpleclir.evaluation.metrics import (
    average_precision,
    mean_average_precision,
    query_average_precisions,
    trec_average_precisions,
)
from simpleclir.evaluation.runs import RunEntry, entries_to_rankings, read_run, write_run
from simpleclir.evaluation.significance import TTestResult, paired_t_test

__all__ = [
    "RunEntry",
    "TTestResult",
    "average_precision",
    "entries_to_rankings",
    "mean_average_precision",
    "paired_t_test",
    "query_average_precisions",
    "read_run",
    "trec_average_precisions",
    "write_run",
]
