"""Running statistics of long position sequences, fed one block at a time.

The trackers only look at the n and x columns of a block, so chain ensembles
and reference walks go through the same code.
"""

import math
from typing import Dict, Iterable, Optional

import numpy as np
from greedy_chain.ensemble import EnsembleBlock
from scipy import stats

# limsup X_n / sqrt(2 s_n^2 log log n) with s_n^2 ~ 3n
LIL_VARIANCE = 3.0
LIL_FROM_N = 100
NORMALITY_N = 10_000
CHECKPOINTS = 24


def lil_checkpoints(n_min: int, n_max: int, count: int = CHECKPOINTS) -> np.ndarray:
    """Geometric grid of steps from n_min to n_max, both included."""
    grid = np.geomspace(n_min, n_max, count).round().astype(np.int64)
    return np.unique(np.concatenate([grid, [n_min, n_max]]))


class LilTracker:
    """Per-replica running max of |X_n| / sqrt(6 n log log n) over n >= n_min."""

    def __init__(
        self,
        n_replicas: int,
        n_max: int,
        n_min: int = LIL_FROM_N,
        checkpoints: Optional[Iterable[int]] = None,
        normality_n: Optional[int] = None,
    ):
        if math.log(n_min) <= math.e:
            raise ValueError(f"n_min={n_min} is too small for log log n")
        self.n_min = n_min
        self.running = np.zeros(n_replicas)
        cps = lil_checkpoints(n_min, n_max) if checkpoints is None else checkpoints
        self.maxima: Dict[int, Optional[np.ndarray]] = {int(c): None for c in cps}
        self.normality_n = min(NORMALITY_N, n_max) if normality_n is None else normality_n
        self.normality_x: Optional[np.ndarray] = None

    def update(self, block: EnsembleBlock) -> None:
        hit = np.flatnonzero(block.n == self.normality_n)
        if hit.size:
            self.normality_x = block.x[hit[0]].astype(float)
        rows = np.flatnonzero(block.n >= self.n_min)
        if not rows.size:
            return
        n = block.n[rows].astype(float)
        scale = np.sqrt(2.0 * LIL_VARIANCE * n * np.log(np.log(n)))
        ratio = np.abs(block.x[rows]) / scale[:, None]
        running = np.maximum.accumulate(np.vstack([self.running, ratio]), axis=0)[1:]
        for i, step in enumerate(block.n[rows]):
            if int(step) in self.maxima:
                self.maxima[int(step)] = running[i].copy()
        self.running = running[-1]

    def normality_pvalue(self) -> float:
        """KS p-value of X_n / sqrt(3n) against N(0, 1) at n = normality_n."""
        if self.normality_x is None:
            raise ValueError(f"step {self.normality_n} was never seen")
        z = self.normality_x / math.sqrt(LIL_VARIANCE * self.normality_n)
        return float(stats.kstest(z, "norm").pvalue)


class ReturnTracker:
    """Returns of X_n to 0, and sign changes in (n_max / 2, n_max]."""

    def __init__(self, n_replicas: int, n_max: int):
        self.half = n_max / 2.0
        self.returns = np.zeros(n_replicas, dtype=np.int64)
        self.changed = np.zeros(n_replicas, dtype=bool)
        # sign of the last nonzero position, 0 before the first move
        self._last_sign = np.zeros(n_replicas, dtype=np.int64)

    def update(self, block: EnsembleBlock) -> None:
        self.returns += (block.x == 0).sum(axis=0)
        signs = np.sign(block.x)
        for step, s in zip(block.n, signs):
            if step > self.half:
                self.changed |= (s != 0) & (self._last_sign != 0) & (s != self._last_sign)
            self._last_sign = np.where(s != 0, s, self._last_sign)


def track(blocks: Iterable[EnsembleBlock], *trackers) -> None:
    for block in blocks:
        for tracker in trackers:
            tracker.update(block)
