"""The correlated random walk that the server's site sequence looks like at large n.

Each move repeats the previous one, except that with probability turn_prob it
reverses. The first move is a fair coin. At turn_prob = 1/4 this is the
limiting model of the greedy server, and it is what acceptance bands are
calibrated on.
"""

import logging
from typing import Iterator

import numpy as np
from greedy_chain.ensemble import DEFAULT_BLOCK, EnsembleBlock
from greedy_chain.streams import REFERENCE, stream

logger = logging.getLogger(__name__)

LIMIT_TURN_PROB = 0.25


class CorrelatedWalkEnsemble:
    """Replicas of the correlated walk, advanced in blocks like a ChainEnsemble.

    Blocks carry no time columns; log_tau and log_T are left empty.
    """

    def __init__(self, n_replicas: int, turn_prob: float, seed: int):
        if not 0.0 < turn_prob < 1.0:
            raise ValueError(f"turn_prob must lie in (0, 1), got {turn_prob}")
        if n_replicas < 1:
            raise ValueError(f"n_replicas must be at least 1, got {n_replicas}")
        self.turn_prob = turn_prob
        self.seed = seed
        self.n = 0
        self.x = np.zeros(n_replicas, dtype=np.int64)
        self.eta = np.zeros(n_replicas, dtype=np.int64)
        self._rng = stream(seed, REFERENCE)

    @property
    def n_replicas(self) -> int:
        return len(self.x)

    def advance(self, n_block: int) -> EnsembleBlock:
        shape = (n_block, self.n_replicas)
        turn = self._rng.random(shape) < self.turn_prob
        previous = self.eta
        if self.n == 0:
            previous = np.where(self._rng.integers(2, size=self.n_replicas) == 1, 1, -1)
            turn[0] = False
        eta = previous * np.cumprod(np.where(turn, -1, 1), axis=0)
        x = self.x + np.cumsum(eta, axis=0)

        block = EnsembleBlock(
            n=np.arange(self.n + 1, self.n + n_block + 1, dtype=np.int64),
            x=x,
            eta=eta,
            turn=turn,
            log_tau=np.empty((0, self.n_replicas)),
            log_T=np.empty((0, self.n_replicas)),
        )
        self.n += n_block
        self.x = x[-1]
        self.eta = eta[-1]
        return block

    def iter_blocks(
        self, n_steps: int, block_size: int = DEFAULT_BLOCK
    ) -> Iterator[EnsembleBlock]:
        while self.n < n_steps:
            yield self.advance(min(block_size, n_steps - self.n))


def reference_correlated_walk(
    n_max: int, n_replicas: int, turn_prob: float, seed: int
) -> EnsembleBlock:
    """Steps 1..n_max of n_replicas independent correlated walks, held in memory."""
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    walk = CorrelatedWalkEnsemble(n_replicas, turn_prob, seed)
    block = walk.advance(n_max)
    logger.info(
        f"[reference seed {seed}] {n_replicas} walks of {n_max} steps, turn_prob={turn_prob}"
    )
    return block
