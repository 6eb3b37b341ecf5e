"""Exact one-step transition of the greedy server chain."""

import logging
import math
from typing import List, Set

import numpy as np
from hitting_time.sampler import HittingSampler, SamplingMethod, sample_zeta

from greedy_chain.errors import HorizonExceeded
from greedy_chain.state import ChainState, LogScalar, next_direction

logger = logging.getLogger(__name__)

# queue counts stay exact integers below this Poisson mean
MAX_EXACT_MEAN = float(2**53)
# above this mean Poisson counts come from a rounded Gaussian
EXACT_POISSON_MAX = 1.0e6

GAUSSIAN_POISSON = "gaussian_poisson"
LEVY_ZETA = "levy_zeta"


def draw_poisson(mean: float, size: int, rng: np.random.Generator, flags: Set[str]) -> List[int]:
    """size independent Poisson(mean) counts as Python ints."""
    if size == 0:
        return []
    if mean <= EXACT_POISSON_MAX:
        return rng.poisson(mean, size).tolist()
    flags.add(GAUSSIAN_POISSON)
    draws = np.rint(rng.normal(mean, math.sqrt(mean), size))
    return np.maximum(draws, 0.0).astype(np.int64).tolist()


def _check_mean(mean: float, step: int, max_exact_mean: float) -> None:
    if not mean <= max_exact_mean:
        raise HorizonExceeded(step, mean)


def step_exact(
    state: ChainState,
    sampler: HittingSampler,
    rng: np.random.Generator,
    tie_rng: np.random.Generator,
    *,
    max_exact_mean: float = MAX_EXACT_MEAN,
) -> ChainState:
    """Move to the longer neighbouring queue, empty it, and let every other queue grow.

    The destination holds its old count plus the arrivals during the unit
    travel, and emptying it takes zeta of that many customers. Inspected sites
    gain Poisson(lam tau) customers over the step, and the newly adjacent site
    ahead is inspected with Poisson(lam T) customers accumulated since time 0.
    The input state is left untouched.
    """
    lam = sampler.lam
    step = state.n + 1
    eta = next_direction(state, tie_rng)
    x_new = state.x + eta

    new = state.copy()
    flags = new.approximations

    k = state.queues[x_new] + draw_poisson(lam, 1, rng, flags)[0]
    if sampler.resolve(k) is SamplingMethod.LEVY_APPROX:
        flags.add(LEVY_ZETA)
    tau = 1.0 + sample_zeta(k, sampler, rng)

    others = [y for y in new.queues if y != x_new]
    _check_mean(lam * tau, step, max_exact_mean)
    for y, arrivals in zip(others, draw_poisson(lam * tau, len(others), rng, flags)):
        new.queues[y] += arrivals

    t_new = state.t + LogScalar.of(tau)
    ahead = x_new + eta
    if ahead not in new.queues:
        backlog = lam * t_new.value
        _check_mean(backlog, step, max_exact_mean)
        new.queues[ahead] = draw_poisson(backlog, 1, rng, flags)[0]

    new.queues[x_new] = 0
    new.x = x_new
    new.eta = eta
    new.t = t_new
    new.n = step
    new.log_tau = math.log(tau)
    logger.debug(f"[n={step}] moved to {x_new} (k={k}, tau={tau:.6g})")
    return new
