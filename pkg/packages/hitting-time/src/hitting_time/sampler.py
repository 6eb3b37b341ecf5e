"""Samplers for the emptying time zeta(k) and the standard Levy law.

zeta(k) is the time a critical M/M/1 queue (arrival and service rate lam)
started with k customers needs to empty. Its jump chain is a fair +-1 walk
absorbed at 0, and the jump times are Exp(2 lam), so zeta(k) is a Gamma
variable whose shape is the number of jumps N. The walk is not stepped one
jump at a time: the descent from k to 0 splits into k independent first
passages one level down, and each passage length is drawn by inverting its
tail Pr(N > 2j - 1) = C(2j, j) / 4^j.
"""

import logging
import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats
from scipy.special import gammaln

from hitting_time.errors import BudgetExceeded
from hitting_time.special import levy_cdf

logger = logging.getLogger(__name__)

# first passages longer than this use the Stirling form of C(2j, j) / 4^j
STIRLING_FROM = 1.0e5
# ladder draws are processed in chunks of at most this many uniforms
CHUNK_UNIFORMS = 2_000_000
MAX_REDRAW_ROUNDS = 64
# generator uniforms are multiples of 2^-53; 0 is mapped just below the smallest
MIN_UNIFORM = 2.0**-54
# standard deviation of the Kolmogorov limit law
KOLMOGOROV_SD = 0.2603
MIN_KS_SAMPLES = 1000


class SamplingMethod(str, Enum):
    EXACT_WALK = "exact"
    LEVY_APPROX = "levy"
    AUTO = "auto"


class CriticalQueueParams(BaseModel):
    """Rates of the critical queue; arrival and service rates are both lam."""

    model_config = ConfigDict(frozen=True)

    lam: float = Field(1.0, gt=0, description="Arrival rate, equal to the service rate")


class HittingSampler(BaseModel):
    """How zeta(k) is drawn."""

    model_config = ConfigDict(frozen=True)

    params: CriticalQueueParams = Field(default_factory=CriticalQueueParams)
    method: SamplingMethod = Field(
        SamplingMethod.AUTO, description="Exact walk, Levy approximation, or by k"
    )
    auto_threshold_k: int = Field(
        64, ge=1, description="Largest k drawn by the exact walk under AUTO"
    )
    step_budget: Optional[int] = Field(
        None, ge=1, description="Abort exact walks needing more jumps than this"
    )

    @property
    def lam(self) -> float:
        return self.params.lam

    def resolve(self, k: int) -> SamplingMethod:
        if self.method is not SamplingMethod.AUTO:
            return self.method
        if k <= self.auto_threshold_k:
            return SamplingMethod.EXACT_WALK
        return SamplingMethod.LEVY_APPROX

    def sample(self, k: int, rng: np.random.Generator) -> float:
        return sample_zeta(k, self, rng)


class DistanceReport(BaseModel):
    """Kolmogorov-Smirnov distance between a scaled sample and the Levy law."""

    label: str = Field("levy-ks", description="What was compared")
    k: Optional[int] = Field(None, description="Initial queue length, for zeta(k)")
    kappa: Optional[float] = Field(None, description="Scale constant, for tau_n")
    n_samples: int = Field(..., description="Sample size")
    ks_statistic: float = Field(..., ge=0, le=1, description="sup |F_n - F_S|")
    mc_stderr: float = Field(..., ge=0, description="Noise scale of the statistic")
    seed: Optional[int] = Field(None, description="Seed of the generator used")
    redraws: int = Field(0, ge=0, description="Walks redrawn after exceeding the budget")


def _log_no_return(j: np.ndarray) -> np.ndarray:
    """log Pr(a first passage one level down needs more than 2j - 1 jumps)."""
    out = np.empty_like(j)
    small = j <= STIRLING_FROM
    js = j[small]
    out[small] = gammaln(2 * js + 1) - 2 * gammaln(js + 1) - js * math.log(4.0)
    jl = j[~small]
    out[~small] = -0.5 * np.log(math.pi * jl) - 1.0 / (8.0 * jl)
    return out


def _passage_jumps(uniforms: np.ndarray) -> np.ndarray:
    """Jump counts 2j - 1 of first passages, by inverting their tail at each uniform."""
    u = np.maximum(uniforms, MIN_UNIFORM)
    log_u = np.log(u)
    j = np.maximum(1.0, np.ceil(1.0 / (math.pi * u * u) - 0.25) - 2.0)

    # smallest j with tail(j) < u; the Stirling guess lands within a couple of steps
    for _ in range(3):
        lower = np.maximum(j - 1.0, 1.0)
        back = (j > 1.0) & (_log_no_return(lower) < log_u)
        if not back.any():
            break
        j = np.where(back, lower, j)
    for _ in range(8):
        ahead = _log_no_return(j) >= log_u
        if not ahead.any():
            break
        j = np.where(ahead, j + 1.0, j)
    return 2.0 * j - 1.0


def _total_jumps(k: int, size: int, rng: np.random.Generator) -> np.ndarray:
    rows = max(1, CHUNK_UNIFORMS // k)
    totals = np.empty(size)
    for start in range(0, size, rows):
        stop = min(size, start + rows)
        jumps = _passage_jumps(rng.random((stop - start, k)))
        totals[start:stop] = jumps.sum(axis=1)
    return totals


def _check_k(k: int) -> None:
    if k < 0:
        raise ValueError(f"initial queue length must be non-negative, got {k}")


def sample_zeta_walk(k: int, sampler: HittingSampler, rng: np.random.Generator) -> float:
    """Exact draw of zeta(k): Gamma(N, 1/(2 lam)) with N the absorbed walk's jump count.

    Raises BudgetExceeded when the walk needs more jumps than the step budget.
    """
    _check_k(k)
    if k == 0:
        return 0.0
    jumps = float(_total_jumps(k, 1, rng)[0])
    scale = 1.0 / (2.0 * sampler.lam)
    budget = sampler.step_budget
    if budget is not None and jumps > budget:
        raise BudgetExceeded(budget, float(rng.gamma(budget, scale)))
    return float(rng.gamma(jumps, scale))


def sample_zeta_walk_batch(
    k: int, size: int, sampler: HittingSampler, rng: np.random.Generator
) -> Tuple[np.ndarray, int]:
    """Draw size exact copies of zeta(k); returns the times and the number of redraws.

    Walks over the step budget are discarded and redrawn, which conditions the
    sample on N <= budget. Redrawing gives up with BudgetExceeded after a bounded
    number of rounds.
    """
    _check_k(k)
    if k == 0:
        return np.zeros(size), 0
    jumps = _total_jumps(k, size, rng)
    redraws = 0
    budget = sampler.step_budget
    if budget is not None:
        for _ in range(MAX_REDRAW_ROUNDS):
            over = jumps > budget
            n_over = int(over.sum())
            if n_over == 0:
                break
            redraws += n_over
            jumps[over] = _total_jumps(k, n_over, rng)
        else:
            raise BudgetExceeded(budget, float(rng.gamma(budget, 1.0 / (2.0 * sampler.lam))))
        if redraws:
            logger.warning(
                f"[k={k}] redrew {redraws} of {size} walks over the step budget {budget}"
            )
    return rng.gamma(jumps, 1.0 / (2.0 * sampler.lam)), redraws


def sample_levy(rng: np.random.Generator, size=None):
    """Standard Levy draws S = 1 / Z^2 with Z standard normal."""
    z = np.asarray(rng.standard_normal(size))
    with np.errstate(divide="ignore"):
        s = 1.0 / (z * z)
    return float(s) if size is None else s


def sample_zeta_levy(k: int, sampler: HittingSampler, rng: np.random.Generator) -> float:
    """Large-k approximation zeta(k) ~ k^2 S / (2 lam)."""
    _check_k(k)
    if k == 0:
        return 0.0
    return float(k) ** 2 * sample_levy(rng) / (2.0 * sampler.lam)


def sample_zeta(k: int, sampler: HittingSampler, rng: np.random.Generator) -> float:
    if sampler.resolve(k) is SamplingMethod.EXACT_WALK:
        return sample_zeta_walk(k, sampler, rng)
    return sample_zeta_levy(k, sampler, rng)


def monte_carlo_quarter(n_pairs: int, rng: np.random.Generator) -> Tuple[float, float]:
    """Monte Carlo estimate of Pr(Z sqrt(S') > 1) with its standard error."""
    s = sample_levy(rng, n_pairs)
    z = rng.standard_normal(n_pairs)
    hits = z * np.sqrt(s) > 1.0
    p = float(hits.mean())
    return p, math.sqrt(p * (1.0 - p) / n_pairs)


def ks_distance_to_levy(
    k: int,
    lam: float,
    n_samples: int,
    rng: np.random.Generator,
    *,
    seed: Optional[int] = None,
    step_budget: Optional[int] = None,
) -> DistanceReport:
    """KS distance between 2 lam zeta(k) / k^2 (exact draws) and the standard Levy law."""
    if n_samples < MIN_KS_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_KS_SAMPLES}, got {n_samples}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    sampler = HittingSampler(
        params=CriticalQueueParams(lam=lam),
        method=SamplingMethod.EXACT_WALK,
        step_budget=step_budget,
    )
    times, redraws = sample_zeta_walk_batch(k, n_samples, sampler, rng)
    scaled = 2.0 * lam * times / float(k) ** 2
    result = stats.kstest(scaled, levy_cdf)
    logger.info(f"[k={k}] KS distance to Levy {result.statistic:.4f} from {n_samples} draws")
    return DistanceReport(
        label="zeta-levy",
        k=k,
        n_samples=n_samples,
        ks_statistic=float(result.statistic),
        mc_stderr=KOLMOGOROV_SD / math.sqrt(n_samples),
        seed=seed,
        redraws=redraws,
    )
