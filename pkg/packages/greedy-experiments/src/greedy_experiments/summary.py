import math
from typing import Tuple

import numpy as np

# log log x is only evaluated where log x exceeds this
LOG_LOG_GUARD = math.e


def mean_stderr(values) -> Tuple[float, float]:
    """Sample mean and sample std / sqrt(n); numpy sums pairwise."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("no values to summarize")
    mean = float(values.mean())
    if values.size == 1:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(values.size))


def median_stderr(values) -> Tuple[float, float]:
    """Sample median and the half-width of its distribution-free 68% interval."""
    values = np.sort(np.asarray(values, dtype=float))
    n = values.size
    if n == 0:
        raise ValueError("no values to summarize")
    half = math.sqrt(n) / 2.0
    lo = max(0, int(math.floor(n / 2.0 - half)))
    hi = min(n - 1, int(math.ceil(n / 2.0 + half)))
    return float(np.median(values)), float(values[hi] - values[lo]) / 2.0


def log_log_of_log(log_values) -> Tuple[np.ndarray, np.ndarray]:
    """log log x from log x, with a mask of where the guard lets it be taken."""
    log_values = np.asarray(log_values, dtype=float)
    ok = log_values > LOG_LOG_GUARD
    out = np.full(log_values.shape, np.nan)
    out[ok] = np.log(log_values[ok])
    return out, ok


def bernoulli_stderr(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n) if n > 0 else 0.0
