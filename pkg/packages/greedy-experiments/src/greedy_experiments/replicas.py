"""Where estimators get their replicas from: exact paths run one by one, or
asymptotic ensembles streamed in blocks."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Iterator, List, Optional

import numpy as np
from greedy_chain.ensemble import ChainEnsemble, EnsembleBlock
from greedy_chain.exact import MAX_EXACT_MEAN, step_exact
from greedy_chain.run import DEFAULT_HANDOFF_N
from greedy_chain.state import init, next_direction
from greedy_chain.streams import replica_streams
from hitting_time.sampler import CriticalQueueParams, HittingSampler

logger = logging.getLogger(__name__)


@dataclass
class ExactPath:
    """Steps 1..n of one exact replica, plus the direction it would take next."""

    replica: int
    x: List[int] = field(default_factory=list)
    eta: List[int] = field(default_factory=list)
    log_tau: List[float] = field(default_factory=list)
    log_T: List[float] = field(default_factory=list)
    # Q_n(X_{n+1}): the longer neighbouring queue right after the n-th emptying
    queue_ahead: List[int] = field(default_factory=list)
    next_eta: Optional[int] = None


def exact_path(
    seed: int,
    replica: int,
    n_steps: int,
    *,
    lam: float = 1.0,
    sampler: Optional[HittingSampler] = None,
    max_exact_mean: float = MAX_EXACT_MEAN,
) -> ExactPath:
    """Run one replica through n_steps exact steps on the streams run() uses.

    HorizonExceeded propagates.
    """
    sampler = sampler or HittingSampler(params=CriticalQueueParams(lam=lam))
    rng, tie_rng = replica_streams(seed, replica)
    state = init()
    path = ExactPath(replica=replica)
    for _ in range(n_steps):
        state = step_exact(state, sampler, rng, tie_rng, max_exact_mean=max_exact_mean)
        path.x.append(state.x)
        path.eta.append(state.eta)
        path.log_tau.append(state.log_tau)
        path.log_T.append(state.t.log_value)
        path.queue_ahead.append(max(state.queues[state.x + 1], state.queues[state.x - 1]))
    path.next_eta = next_direction(state, tie_rng)
    return path


def exact_paths(
    n_steps: int,
    n_replicas: int,
    seed: int,
    *,
    lam: float = 1.0,
    sampler: Optional[HittingSampler] = None,
    threads: int = 1,
) -> List[ExactPath]:
    """Exact paths of replicas 0..n_replicas-1, in replica order."""
    job = partial(exact_path, seed, n_steps=n_steps, lam=lam, sampler=sampler)
    if threads > 1 and n_replicas > 1:
        chunksize = max(1, n_replicas // (4 * threads))
        with ProcessPoolExecutor(max_workers=threads) as executor:
            paths = list(executor.map(job, range(n_replicas), chunksize=chunksize))
    else:
        paths = [job(replica) for replica in range(n_replicas)]
    logger.info(f"[exact seed {seed}] {n_replicas} paths of {n_steps} steps done")
    return paths


def exact_block(paths: List[ExactPath]) -> EnsembleBlock:
    """Exact paths laid out like an ensemble block, one column per replica."""
    n_steps = len(paths[0].x)
    return EnsembleBlock(
        n=np.arange(1, n_steps + 1, dtype=np.int64),
        x=np.array([p.x for p in paths], dtype=np.int64).T,
        eta=np.array([p.eta for p in paths], dtype=np.int64).T,
        turn=np.array([[False] + [a != b for a, b in zip(p.eta, p.eta[1:])] for p in paths]).T,
        log_tau=np.array([p.log_tau for p in paths]).T,
        log_T=np.array([p.log_T for p in paths]).T,
    )


def chain_blocks(
    n_steps: int,
    n_replicas: int,
    seed: int,
    *,
    lam: float = 1.0,
    handoff_n: int = DEFAULT_HANDOFF_N,
    threads: int = 1,
    block_size: int = 1000,
) -> Iterator[EnsembleBlock]:
    """Asymptotic-mode blocks covering steps 1..n_steps of every replica."""
    ensemble = ChainEnsemble.from_seed(
        n_replicas, seed, min(handoff_n, n_steps), lam=lam, threads=threads
    )
    yield from ensemble.iter_blocks(n_steps, block_size)


def stacked(blocks: Iterator[EnsembleBlock]) -> EnsembleBlock:
    """Concatenate blocks; only for runs short enough to hold in memory."""
    blocks = list(blocks)
    return EnsembleBlock(
        n=np.concatenate([b.n for b in blocks]),
        **{
            name: np.vstack([getattr(b, name) for b in blocks])
            for name in ("x", "eta", "turn", "log_tau", "log_T")
        },
    )
