"""Two-tailed paired t-test over per-query scores."""

import math
from collections.abc import Mapping, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy import stats

from simpleclir.utils.logging import setup_logger

logger = setup_logger(__name__)


class TTestResult(BaseModel):
    """Outcome of a paired t-test of A against B."""

    t: float = Field(..., description="Paired t statistic of A - B")
    p: float = Field(..., ge=0.0, le=1.0, description="Two-tailed p-value")
    df: int = Field(..., ge=1)
    mean_difference: float
    alpha: float = 0.05

    @property
    def significant(self) -> bool:
        return self.p < self.alpha


def paired_t_test(
    a: "Sequence[float] | Mapping[str, float]",
    b: "Sequence[float] | Mapping[str, float]",
    alpha: float = 0.05,
) -> TTestResult:
    """Paired t-test of ``a`` against ``b``; mappings are paired by key.

    All-zero differences give t = 0 and p = 1. Constant non-zero differences give an
    infinite t and p = 0.
    """
    if isinstance(a, Mapping) or isinstance(b, Mapping):
        if not (isinstance(a, Mapping) and isinstance(b, Mapping)) or set(a) != set(b):
            raise ValueError("Paired scores must cover the same query ids")
        keys = sorted(a)
        a, b = [a[k] for k in keys], [b[k] for k in keys]
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"Paired samples must be equal-length vectors, got {x.shape} and {y.shape}")
    n = len(x)
    if n < 2:
        raise ValueError("A paired t-test needs at least 2 pairs")

    diff = x - y
    df = n - 1
    mean = float(diff.mean())
    if not np.any(diff):
        return TTestResult(t=0.0, p=1.0, df=df, mean_difference=0.0, alpha=alpha)
    # std() of equal values can round to a tiny non-zero number
    if np.all(diff == diff[0]):
        logger.warning("Paired differences are constant (%.6g); reporting an infinite t statistic", mean)
        return TTestResult(t=math.copysign(math.inf, mean), p=0.0, df=df, mean_difference=mean, alpha=alpha)
    result = stats.ttest_rel(x, y)
    return TTestResult(
        t=float(result.statistic), p=float(result.pvalue), df=df, mean_difference=mean, alpha=alpha
    )
