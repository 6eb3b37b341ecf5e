"""Distributional distances and the quarter identity."""

import logging
import math
from typing import Sequence

import numpy as np
from greedy_chain.streams import SAMPLING, stream
from hitting_time.sampler import (
    KOLMOGOROV_SD,
    CriticalQueueParams,
    DistanceReport,
    HittingSampler,
    SamplingMethod,
    ks_distance_to_levy,
    monte_carlo_quarter,
    sample_zeta_walk_batch,
)
from hitting_time.special import levy_cdf, levy_sf, quarter_quadrature
from scipy import special

from greedy_experiments.models import EstimateResult, ScalingPoint, ScalingSeries
from greedy_experiments.summary import bernoulli_stderr

logger = logging.getLogger(__name__)

GRID_POINTS = 200
QUARTER = 0.25


def normal_quantile_grid(n_points: int = GRID_POINTS, scale: float = math.sqrt(2.0)) -> np.ndarray:
    """Quantiles i / (n_points + 1), i = 1..n_points, of N(0, scale^2)."""
    levels = np.arange(1, n_points + 1) / (n_points + 1)
    return scale * special.ndtri(levels)


def poisson_diff_sample(kappa: float, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """(nu - nu') / sqrt(kappa) for independent Poisson(kappa) nu, nu'."""
    nu = rng.poisson(kappa, n_samples)
    nu_prime = rng.poisson(kappa, n_samples)
    return (nu - nu_prime) / math.sqrt(kappa)


def poisson_diff_distance(kappa: float, n_samples: int, seed: int = 0) -> DistanceReport:
    """sup over a 200-point grid of |F_n(u) - Phi(u / sqrt 2)| for the scaled Poisson difference.

    The grid sits at the quantiles of N(0, 2), so the reference CDF there is
    exactly i / 201.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples}")
    draws = np.sort(poisson_diff_sample(kappa, n_samples, stream(seed, SAMPLING)))
    grid = normal_quantile_grid()
    empirical = np.searchsorted(draws, grid, side="right") / n_samples
    reference = np.arange(1, GRID_POINTS + 1) / (GRID_POINTS + 1)
    distance = float(np.max(np.abs(empirical - reference)))
    logger.info(f"[poisson-diff kappa={kappa:g}] sup distance {distance:.5f} from {n_samples} draws")
    return DistanceReport(
        label="poisson-diff",
        kappa=kappa,
        n_samples=n_samples,
        ks_statistic=distance,
        mc_stderr=KOLMOGOROV_SD / math.sqrt(n_samples),
        seed=seed,
    )


def levy_ks(k: int, n_samples: int, seed: int = 0, *, lam: float = 1.0) -> DistanceReport:
    """KS distance of 2 lam zeta(k) / k^2 to the standard Levy law, on the sampling stream."""
    return ks_distance_to_levy(k, lam, n_samples, stream(seed, SAMPLING), seed=seed)


def estimate_quarter(n_pairs: int, seed: int = 0) -> EstimateResult:
    """Pr(Z sqrt(S') > 1) by Monte Carlo, with the quadrature value alongside."""
    if n_pairs < 2:
        raise ValueError(f"n_pairs must be at least 2, got {n_pairs}")
    point, stderr = monte_carlo_quarter(n_pairs, stream(seed, SAMPLING))
    quadrature = quarter_quadrature()
    logger.info(f"[quarter] quadrature {quadrature:.10f}, Monte Carlo {point:.5f}")
    return EstimateResult(
        label="quarter",
        point=point,
        stderr=stderr,
        n_replicas=n_pairs,
        seed=seed,
        parameters={"n_pairs": n_pairs},
        extra={"quadrature": quadrature, "target": QUARTER},
    )


def hitting_tail_profile(
    ks: Sequence[int], n_samples: int, seed: int = 0, *, lam: float = 1.0
) -> ScalingSeries:
    """Empirical Pr(zeta(k) <= k^1.5) per k, with Pr(zeta(k) >= k^2.5) in extra.

    The Levy predictions for both tails are reported next to each point.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples}")
    sampler = HittingSampler(
        params=CriticalQueueParams(lam=lam), method=SamplingMethod.EXACT_WALK
    )
    rng = stream(seed, SAMPLING)
    points = []
    for k in sorted(ks):
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")
        times, _ = sample_zeta_walk_batch(k, n_samples, sampler, rng)
        lower = float(np.mean(times <= k**1.5))
        upper = float(np.mean(times >= k**2.5))
        points.append(
            ScalingPoint(
                index=k,
                value=lower,
                stderr=bernoulli_stderr(lower, n_samples),
                count=n_samples,
                extra={
                    "upper": upper,
                    "upper_stderr": bernoulli_stderr(upper, n_samples),
                    "levy_lower": float(levy_cdf(2.0 * lam * k**-0.5)),
                    "levy_upper": float(levy_sf(2.0 * lam * k**0.5)),
                },
            )
        )
    return ScalingSeries(
        label="hitting-tails",
        points=points,
        n_replicas=n_samples,
        seed=seed,
        parameters={"ks": sorted(ks), "lam": lam},
    )
