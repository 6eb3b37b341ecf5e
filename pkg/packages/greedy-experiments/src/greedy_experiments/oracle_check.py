"""Cross-checks between the discrete chain and the continuous-time oracle."""

import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import List, Optional, Tuple

import numpy as np
from greedy_chain.errors import HorizonExceeded
from greedy_chain.exact import step_exact
from greedy_chain.oracle import continuous_oracle
from greedy_chain.state import init, next_direction
from greedy_chain.streams import replica_streams
from hitting_time.sampler import CriticalQueueParams, HittingSampler, SamplingMethod
from scipy import stats

from greedy_experiments.models import OracleReport, RegimeReport
from greedy_experiments.summary import bernoulli_stderr

logger = logging.getLogger(__name__)

# eta_1..eta_4 need the first three emptyings
COMPARED_MOVES = 4
DEFAULT_T_MAX = 1.0e5
STUCK_MOVES = 5

Pattern = Tuple[int, ...]


def _pattern_key(pattern: Pattern) -> str:
    return "".join("+" if eta > 0 else "-" for eta in pattern)


def _all_patterns() -> List[str]:
    keys = []
    for code in range(2**COMPARED_MOVES):
        bits = [(code >> i) & 1 for i in reversed(range(COMPARED_MOVES))]
        keys.append(_pattern_key(tuple(1 if b else -1 for b in bits)))
    return keys


def chain_directions(
    seed: int, replica: int, *, lam: float, t_max: float
) -> Optional[Pattern]:
    """eta_1..eta_4 of one exact replica, or None when T_3 > t_max or the horizon is hit."""
    sampler = HittingSampler(params=CriticalQueueParams(lam=lam), method=SamplingMethod.EXACT_WALK)
    rng, tie_rng = replica_streams(seed, replica)
    state = init()
    etas = []
    try:
        for _ in range(COMPARED_MOVES - 1):
            state = step_exact(state, sampler, rng, tie_rng)
            if state.t.value > t_max:
                return None
            etas.append(state.eta)
    except HorizonExceeded:
        return None
    etas.append(next_direction(state, tie_rng))
    return tuple(etas)


def oracle_directions(
    seed: int, replica: int, *, lam: float, mu: float, t_max: float
) -> Optional[Pattern]:
    """eta_1..eta_4 from the event-driven simulation, or None when censored."""
    log = continuous_oracle(
        t_max, lam, mu, seed, replica=replica, max_departures=COMPARED_MOVES - 1
    )
    if log.censored:
        return None
    return tuple(log.directions()[:COMPARED_MOVES])


def _collect(job, n_replicas: int, threads: int) -> List[Optional[Pattern]]:
    if threads > 1 and n_replicas > 1:
        chunksize = max(1, n_replicas // (4 * threads))
        with ProcessPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(job, range(n_replicas), chunksize=chunksize))
    return [job(replica) for replica in range(n_replicas)]


def _count(patterns: List[Optional[Pattern]], keys: List[str], tag: str) -> Tuple[List[int], int]:
    counts = dict.fromkeys(keys, 0)
    censored = []
    for replica, pattern in enumerate(patterns):
        if pattern is None:
            censored.append(replica)
            continue
        counts[_pattern_key(pattern)] += 1
    if censored:
        shown = ", ".join(str(r) for r in censored[:10])
        logger.warning(f"[{tag}] {len(censored)} censored replicas: {shown}")
    return [counts[k] for k in keys], len(censored)


def oracle_agreement(
    n_replicas: int,
    seed: int = 0,
    t_max: float = DEFAULT_T_MAX,
    *,
    lam: float = 1.0,
    mu: float = 1.0,
    threads: int = 1,
) -> OracleReport:
    """Chi-square test that step_exact and continuous_oracle give the same eta_1..eta_4.

    Both sides drop replicas whose third emptying comes after t_max; a
    HorizonExceeded in the chain counts as censored too.
    """
    if n_replicas < 1:
        raise ValueError(f"n_replicas must be at least 1, got {n_replicas}")
    if lam != mu:
        raise ValueError(f"the chain is critical only for lam == mu, got {lam} and {mu}")
    keys = _all_patterns()
    chain = _collect(partial(chain_directions, seed, lam=lam, t_max=t_max), n_replicas, threads)
    oracle = _collect(
        partial(oracle_directions, seed, lam=lam, mu=mu, t_max=t_max), n_replicas, threads
    )
    chain_counts, chain_censored = _count(chain, keys, "oracle-check chain")
    oracle_counts, oracle_censored = _count(oracle, keys, "oracle-check oracle")

    table = np.array([chain_counts, oracle_counts])
    seen = table.sum(axis=0) > 0
    if table[:, seen].sum(axis=1).min() == 0:
        raise ValueError("every replica of one simulator was censored")
    result = stats.chi2_contingency(table[:, seen])
    chi2, p_value, dof = float(result[0]), float(result[1]), int(result[2])
    logger.info(f"[oracle-check seed {seed}] chi2={chi2:.3f}, dof={dof}, p={p_value:.4f}")
    return OracleReport(
        lam=lam,
        mu=mu,
        t_max=t_max,
        n_replicas=n_replicas,
        seed=seed,
        chi2=chi2,
        p_value=p_value,
        dof=dof,
        censored_exact=chain_censored,
        censored_oracle=oracle_censored,
        table={k: [a, b] for k, a, b in zip(keys, chain_counts, oracle_counts)},
    )


def regime_report(
    lam: float,
    mu: float,
    t_max: float,
    n_replicas: int,
    seed: int = 0,
    *,
    min_moves: int = STUCK_MOVES,
) -> RegimeReport:
    """Fraction of oracle runs that complete fewer than min_moves moves by t_max."""
    if n_replicas < 1:
        raise ValueError(f"n_replicas must be at least 1, got {n_replicas}")
    moves, changes, censored = [], [], 0
    for replica in range(n_replicas):
        log = continuous_oracle(t_max, lam, mu, seed, replica=replica)
        moves.append(log.completed_moves())
        changes.append(log.direction_changes())
        censored += log.censored
    stuck = float(np.mean(np.array(moves) < min_moves))
    logger.info(f"[regime lam={lam} mu={mu}] stuck fraction {stuck:.3f} by t={t_max:g}")
    return RegimeReport(
        lam=lam,
        mu=mu,
        t_max=t_max,
        n_replicas=n_replicas,
        seed=seed,
        stuck_fraction=stuck,
        stuck_stderr=bernoulli_stderr(stuck, n_replicas),
        median_direction_changes=float(np.median(changes)),
        median_completed_moves=float(np.median(moves)),
        censored=censored,
        min_moves=min_moves,
    )
