"""Many replicas advanced side by side in the renormalized recursion."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Iterator, List, Optional, Sequence

import numpy as np
from hitting_time.sampler import HittingSampler

from greedy_chain.asymptotic import asymptotic_kernel, log_tau_from_gamma
from greedy_chain.run import DEFAULT_HANDOFF_N, Prefix, asymptotic_prefix
from greedy_chain.streams import continuation_stream

logger = logging.getLogger(__name__)

DEFAULT_BLOCK = 1000
# doubles of pending normal draws held at once across all replicas
DRAW_BUDGET = 1 << 22


@dataclass
class EnsembleBlock:
    """Consecutive steps of every replica; arrays have shape (steps, replicas)."""

    n: np.ndarray
    x: np.ndarray
    eta: np.ndarray
    turn: np.ndarray
    log_tau: np.ndarray
    log_T: np.ndarray

    def __len__(self) -> int:
        return len(self.n)


def compute_prefixes(
    n_replicas: int,
    seed: int,
    handoff_n: int = DEFAULT_HANDOFF_N,
    *,
    lam: float = 1.0,
    sampler: Optional[HittingSampler] = None,
    z2_correction: bool = False,
    threads: int = 1,
) -> List[Prefix]:
    """Exact prefixes of replicas 0..n_replicas-1, in replica order."""
    job = partial(
        asymptotic_prefix,
        seed,
        handoff_n=handoff_n,
        lam=lam,
        sampler=sampler,
        z2_correction=z2_correction,
        keep_records=True,
    )
    if threads > 1 and n_replicas > 1:
        chunksize = max(1, n_replicas // (4 * threads))
        with ProcessPoolExecutor(max_workers=threads) as executor:
            prefixes = list(executor.map(job, range(n_replicas), chunksize=chunksize))
    else:
        prefixes = [job(replica) for replica in range(n_replicas)]

    early = sum(p.handoff_n < handoff_n for p in prefixes)
    if early:
        logger.warning(f"[ensemble seed {seed}] {early} of {n_replicas} replicas handed off early")
    logger.info(f"[ensemble seed {seed}] {n_replicas} exact prefixes of {handoff_n} steps ready")
    return prefixes


class ChainEnsemble:
    """Vectorized continuation of aligned replicas.

    Each replica draws from its own continuation stream in the order
    step_asymptotic does, so replica r follows run(seed=seed, replica=r) step
    for step whatever the size of the ensemble.
    """

    def __init__(
        self,
        prefixes: Sequence[Prefix],
        seed: int,
        *,
        lam: float = 1.0,
        z2_correction: bool = False,
    ):
        if not prefixes:
            raise ValueError("an ensemble needs at least one replica")
        steps = {p.state.n for p in prefixes}
        if len(steps) != 1:
            raise ValueError(f"prefixes end at different steps: {sorted(steps)}")
        self.seed = seed
        self.lam = lam
        self.z2_correction = z2_correction
        self.n = steps.pop()
        self.x = np.array([p.state.x for p in prefixes], dtype=np.int64)
        self.eta = np.array([p.state.eta for p in prefixes], dtype=np.int64)
        self.next_eta = np.array([p.state.next_eta for p in prefixes], dtype=np.int64)
        self.gamma_hat = np.array([p.state.gamma_hat for p in prefixes])
        self.log_gap = np.array([p.state.log_gap for p in prefixes])
        self.handoffs = np.array([p.handoff_n for p in prefixes], dtype=np.int64)
        self.approximations = sorted({a for p in prefixes for a in p.approximations})
        self._prefix_block = self._block_from_prefixes(prefixes)
        self._rngs = [self._continuation(p) for p in prefixes]

    @classmethod
    def from_seed(
        cls,
        n_replicas: int,
        seed: int,
        handoff_n: int = DEFAULT_HANDOFF_N,
        *,
        lam: float = 1.0,
        sampler: Optional[HittingSampler] = None,
        z2_correction: bool = False,
        threads: int = 1,
    ) -> "ChainEnsemble":
        prefixes = compute_prefixes(
            n_replicas,
            seed,
            handoff_n,
            lam=lam,
            sampler=sampler,
            z2_correction=z2_correction,
            threads=threads,
        )
        return cls(prefixes, seed, lam=lam, z2_correction=z2_correction)

    @property
    def n_replicas(self) -> int:
        return len(self.x)

    @property
    def log_tau(self) -> np.ndarray:
        return log_tau_from_gamma(self.gamma_hat, self.n)

    @staticmethod
    def _block_from_prefixes(prefixes: Sequence[Prefix]) -> Optional[EnsembleBlock]:
        if not prefixes[0].records:
            return None
        columns = {
            name: np.array([[getattr(r, name) for r in p.records] for p in prefixes]).T
            for name in ("x", "eta", "turn", "log_tau", "log_T")
        }
        n = np.array([r.n for r in prefixes[0].records], dtype=np.int64)
        return EnsembleBlock(n=n, **columns)

    @property
    def draws_per_step(self) -> int:
        return 3 if self.z2_correction else 2

    def _continuation(self, prefix: Prefix) -> np.random.Generator:
        rng = continuation_stream(self.seed, prefix.replica)
        padded = prefix.state.n - prefix.handoff_n
        if padded:
            # steps after an early handoff already used these draws
            rng.standard_normal((padded, self.draws_per_step))
        return rng

    def _draw(self, n_block: int) -> np.ndarray:
        """Normals for n_block steps, shaped (steps, draws per step, replicas)."""
        per_replica = [rng.standard_normal((n_block, self.draws_per_step)) for rng in self._rngs]
        return np.stack(per_replica, axis=-1)

    def step(self, draws: Optional[np.ndarray] = None) -> None:
        """Advance every replica by one step; draws default to the replica streams."""
        if draws is None:
            draws = self._draw(1)[0]
        zp = draws[0]
        with np.errstate(divide="ignore"):
            levy = 1.0 / (zp * zp)
        z2 = draws[2] if self.z2_correction else None
        self.gamma_hat, self.log_gap, turn = asymptotic_kernel(
            self.n, self.gamma_hat, self.log_gap, levy, draws[1], self.lam, z2
        )
        self.x = self.x + self.next_eta
        self.eta = self.next_eta
        self.next_eta = np.where(turn, -self.next_eta, self.next_eta)
        self.n += 1

    def advance(self, n_block: int) -> EnsembleBlock:
        """Take n_block steps and return what every replica did."""
        shape = (n_block, self.n_replicas)
        block = EnsembleBlock(
            n=np.arange(self.n + 1, self.n + n_block + 1, dtype=np.int64),
            x=np.empty(shape, dtype=np.int64),
            eta=np.empty(shape, dtype=np.int64),
            turn=np.empty(shape, dtype=bool),
            log_tau=np.empty(shape),
            log_T=np.empty(shape),
        )
        chunk = max(1, DRAW_BUDGET // (self.draws_per_step * self.n_replicas))
        for start in range(0, n_block, chunk):
            draws = self._draw(min(chunk, n_block - start))
            for offset, step_draws in enumerate(draws):
                i = start + offset
                previous = self.eta
                self.step(step_draws)
                block.x[i] = self.x
                block.eta[i] = self.eta
                block.turn[i] = self.eta != previous
                block.log_tau[i] = self.log_tau
                block.log_T[i] = block.log_tau[i] + self.log_gap
        return block

    def iter_blocks(
        self, n_steps: int, block_size: int = DEFAULT_BLOCK
    ) -> Iterator[EnsembleBlock]:
        """Blocks covering steps 1..n_steps, starting with the exact prefixes when kept."""
        if self._prefix_block is not None and self.n == self._prefix_block.n[-1]:
            yield self._prefix_block
        while self.n < n_steps:
            yield self.advance(min(block_size, n_steps - self.n))
