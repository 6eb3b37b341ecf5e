"""Single-replica runs: exact steps, then optionally the renormalized recursion."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from hitting_time.sampler import CriticalQueueParams, HittingSampler

from greedy_chain.asymptotic import AsymptoticState, handoff, step_asymptotic
from greedy_chain.errors import HorizonExceeded
from greedy_chain.exact import MAX_EXACT_MEAN, step_exact
from greedy_chain.state import ChainState, init
from greedy_chain.streams import continuation_stream, replica_streams
from greedy_chain.trajectory import Mode, Trajectory, TrajectoryRecord

logger = logging.getLogger(__name__)

DEFAULT_HANDOFF_N = 6


@dataclass
class Prefix:
    """A replica brought to step handoff_n, ready for the renormalized recursion."""

    replica: int
    state: AsymptoticState
    handoff_n: int
    records: List[TrajectoryRecord] = field(default_factory=list)
    approximations: List[str] = field(default_factory=list)


def _turned(eta: int, records: List[TrajectoryRecord]) -> bool:
    return bool(records) and records[-1].eta != eta


def _exact_phase(
    n_exact: int,
    sampler: HittingSampler,
    rng: np.random.Generator,
    tie_rng: np.random.Generator,
    *,
    allow_early_handoff: bool,
    max_exact_mean: float,
    tag: str,
) -> Tuple[ChainState, List[TrajectoryRecord]]:
    state = init()
    records: List[TrajectoryRecord] = []
    while state.n < n_exact:
        try:
            state = step_exact(state, sampler, rng, tie_rng, max_exact_mean=max_exact_mean)
        except HorizonExceeded as e:
            if not allow_early_handoff or state.n == 0:
                raise
            logger.warning(f"[{tag}] exact horizon reached at step {e.step}; handing off at n={state.n}")
            break
        records.append(
            TrajectoryRecord.model_construct(
                n=state.n,
                x=state.x,
                eta=state.eta,
                turn=_turned(state.eta, records),
                log_tau=state.log_tau,
                log_T=state.t.log_value,
            )
        )
    return state, records


def _asymptotic_phase(
    a: AsymptoticState,
    n_target: int,
    rng: np.random.Generator,
    records: List[TrajectoryRecord],
    *,
    lam: float,
    z2_correction: bool,
) -> AsymptoticState:
    while a.n < n_target:
        a = step_asymptotic(a, rng, lam=lam, z2_correction=z2_correction)
        records.append(
            TrajectoryRecord.model_construct(
                n=a.n,
                x=a.x,
                eta=a.eta,
                turn=_turned(a.eta, records),
                log_tau=a.log_tau,
                log_T=a.log_T,
            )
        )
    return a


def _default_sampler(lam: float, sampler: Optional[HittingSampler]) -> HittingSampler:
    if sampler is None:
        return HittingSampler(params=CriticalQueueParams(lam=lam))
    if not math.isclose(sampler.lam, lam):
        raise ValueError(f"sampler rate {sampler.lam} differs from lam={lam}")
    return sampler


def run(
    n_steps: int,
    mode: Mode = Mode.ASYMPTOTIC,
    handoff_n: int = DEFAULT_HANDOFF_N,
    seed: int = 0,
    *,
    lam: float = 1.0,
    replica: int = 0,
    sampler: Optional[HittingSampler] = None,
    z2_correction: bool = False,
    max_exact_mean: float = MAX_EXACT_MEAN,
) -> Trajectory:
    """Simulate n_steps emptyings of one replica; identical arguments give identical output.

    Exact mode uses step_exact throughout and lets HorizonExceeded propagate.
    Asymptotic mode runs handoff_n exact steps (fewer if the exact horizon is
    reached first) and continues with step_asymptotic on the replica's
    continuation stream.
    """
    mode = Mode(mode)
    if n_steps < 1:
        raise ValueError(f"n_steps must be at least 1, got {n_steps}")
    if mode is Mode.ASYMPTOTIC and not 1 <= handoff_n <= n_steps:
        raise ValueError(f"handoff_n must lie in [1, n_steps], got {handoff_n}")
    sampler = _default_sampler(lam, sampler)
    rng, tie_rng = replica_streams(seed, replica)
    tag = f"replica {replica}"

    n_exact = n_steps if mode is Mode.EXACT else handoff_n
    state, records = _exact_phase(
        n_exact,
        sampler,
        rng,
        tie_rng,
        allow_early_handoff=mode is Mode.ASYMPTOTIC,
        max_exact_mean=max_exact_mean,
        tag=tag,
    )
    actual_handoff = None
    if mode is Mode.ASYMPTOTIC:
        actual_handoff = state.n
        a = handoff(state, tie_rng)
        _asymptotic_phase(
            a,
            n_steps,
            continuation_stream(seed, replica),
            records,
            lam=lam,
            z2_correction=z2_correction,
        )
    logger.info(f"[{tag}] {mode.value} run of {n_steps} steps done (seed {seed})")
    return Trajectory(
        records=records,
        mode=mode,
        seed=seed,
        handoff_n=actual_handoff,
        lam=lam,
        approximations=sorted(state.approximations),
    )


def asymptotic_prefix(
    seed: int,
    replica: int,
    handoff_n: int = DEFAULT_HANDOFF_N,
    *,
    lam: float = 1.0,
    sampler: Optional[HittingSampler] = None,
    z2_correction: bool = False,
    max_exact_mean: float = MAX_EXACT_MEAN,
    keep_records: bool = False,
) -> Prefix:
    """Bring one replica to step handoff_n the same way run() does.

    After an early handoff the remaining steps up to handoff_n are taken in
    the renormalized recursion on the replica's continuation stream, so every
    replica of an ensemble is aligned.
    """
    sampler = _default_sampler(lam, sampler)
    rng, tie_rng = replica_streams(seed, replica)
    state, records = _exact_phase(
        handoff_n,
        sampler,
        rng,
        tie_rng,
        allow_early_handoff=True,
        max_exact_mean=max_exact_mean,
        tag=f"replica {replica}",
    )
    actual_handoff = state.n
    a = _asymptotic_phase(
        handoff(state, tie_rng),
        handoff_n,
        continuation_stream(seed, replica),
        records,
        lam=lam,
        z2_correction=z2_correction,
    )
    return Prefix(
        replica=replica,
        state=a,
        handoff_n=actual_handoff,
        records=records if keep_records else [],
        approximations=sorted(state.approximations),
    )
