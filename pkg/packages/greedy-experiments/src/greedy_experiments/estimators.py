"""Monte Carlo estimators of the chain's limits.

Every estimator is a pure function of its arguments: the same seed and
parameters reproduce the same result, whatever the number of threads.
"""

import logging
import math
from typing import Iterable, Iterator

import numpy as np
from greedy_chain.ensemble import DEFAULT_BLOCK, EnsembleBlock
from greedy_chain.run import DEFAULT_HANDOFF_N
from greedy_chain.trajectory import Mode

from greedy_experiments.long_run import LIL_FROM_N, LilTracker, ReturnTracker, track
from greedy_experiments.models import (
    EstimateResult,
    MartingaleAudit,
    MartingaleRow,
    ScalingPoint,
    ScalingSeries,
)
from greedy_experiments.replicas import chain_blocks, exact_block, exact_paths, stacked
from greedy_experiments.summary import (
    bernoulli_stderr,
    log_log_of_log,
    mean_stderr,
    median_stderr,
)

logger = logging.getLogger(__name__)

TURN_LIMIT = 0.25
# a = (1 - 2q) / q at q = 1/4
TURN_BONUS = 2
MARTINGALE_LIMIT = 1 + 8 * TURN_LIMIT
NT_LIMIT = 1.0 / math.log(2.0)
LIL_LIMIT = 1.0
# limsup S(t) / sqrt(log log t * log log log log t), composing the LIL with N_t
LIL_CONSTANT = math.sqrt(6.0 / math.log(2.0))
MIN_LIL_N_MAX = 1000
# log log tau_n / n stays inside this bracket from GROWTH_FROM_N on, except for
# replicas with clamped early steps or one huge emptying time
GROWTH_FROM_N = 20
GROWTH_BRACKET = (math.log(1.8), math.log(2.2))
GROWTH_OUTSIDE_BOUND = 0.01
# share of replicas changing sign in the last half run; the reference walk gives 0.498
SIGN_CHANGE_TARGET = 0.5


def _check_replicas(n_replicas: int) -> None:
    if n_replicas < 1:
        raise ValueError(f"n_replicas must be at least 1, got {n_replicas}")


def _blocks(
    n_steps: int,
    n_replicas: int,
    seed: int,
    mode: Mode,
    *,
    lam: float,
    handoff_n: int,
    threads: int,
    block_size: int = DEFAULT_BLOCK,
) -> Iterator[EnsembleBlock]:
    if Mode(mode) is Mode.EXACT:
        yield exact_block(exact_paths(n_steps, n_replicas, seed, lam=lam, threads=threads))
    else:
        yield from chain_blocks(
            n_steps,
            n_replicas,
            seed,
            lam=lam,
            handoff_n=handoff_n,
            threads=threads,
            block_size=block_size,
        )


def estimate_turning(
    n_index: int,
    n_replicas: int,
    mode: Mode = Mode.ASYMPTOTIC,
    seed: int = 0,
    *,
    lam: float = 1.0,
    handoff_n: int = DEFAULT_HANDOFF_N,
    threads: int = 1,
) -> EstimateResult:
    """Frequency of eta_{n+1} != eta_n at n = n_index across replicas."""
    mode = Mode(mode)
    if n_index < 2:
        raise ValueError(f"n_index must be at least 2, got {n_index}")
    _check_replicas(n_replicas)

    if mode is Mode.EXACT:
        paths = exact_paths(n_index, n_replicas, seed, lam=lam, threads=threads)
        turned = np.array([p.next_eta != p.eta[-1] for p in paths], dtype=float)
    else:
        block = stacked(
            chain_blocks(
                n_index + 1, n_replicas, seed, lam=lam, handoff_n=handoff_n, threads=threads
            )
        )
        row = int(np.flatnonzero(block.n == n_index + 1)[0])
        turned = block.turn[row].astype(float)

    point, stderr = mean_stderr(turned)
    logger.info(f"[turning n={n_index}] {point:.5f} +/- {stderr:.5f} over {n_replicas} replicas")
    return EstimateResult(
        label="turning",
        point=point,
        stderr=stderr,
        n_replicas=n_replicas,
        seed=seed,
        parameters={"n_index": n_index, "mode": mode.value, "lam": lam, "handoff_n": handoff_n},
        extra={"target": TURN_LIMIT},
    )


def tau_growth_series(
    n_max: int,
    n_replicas: int,
    seed: int = 0,
    *,
    lam: float = 1.0,
    handoff_n: int = DEFAULT_HANDOFF_N,
    bracket_from_n: int = GROWTH_FROM_N,
    threads: int = 1,
) -> ScalingSeries:
    """Mean of log log tau_n / n for n = 1..n_max, with gamma_hat = log tau_n / 2^n.

    Points only average replicas whose log tau_n clears the log log guard.
    The per-replica gamma_hat at n_max is returned as the series samples.
    The series extras give the share of replicas whose log log tau_n / n leaves
    GROWTH_BRACKET at some n >= bracket_from_n; a replica still under the
    guard there counts as below.
    """
    _check_replicas(n_replicas)
    low, high = GROWTH_BRACKET
    below = np.zeros(n_replicas, dtype=bool)
    above = np.zeros(n_replicas, dtype=bool)
    points = []
    gamma = np.array([])
    for block in chain_blocks(
        n_max, n_replicas, seed, lam=lam, handoff_n=handoff_n, threads=threads
    ):
        for step, log_tau, log_T in zip(block.n, block.log_tau, block.log_T):
            step = int(step)
            gamma = np.ldexp(log_tau, -step)
            log_log, ok = log_log_of_log(log_tau)
            if step >= bracket_from_n:
                finite = np.isfinite(log_tau)
                rate = np.where(ok, log_log / step, -np.inf)
                below |= finite & (rate < low)
                above |= finite & (rate > high)
            if not ok.any():
                continue
            value, stderr = mean_stderr(log_log[ok] / step)
            q25, q75 = np.percentile(gamma, [25, 75])
            points.append(
                ScalingPoint(
                    index=step,
                    value=value,
                    stderr=stderr,
                    count=int(ok.sum()),
                    extra={
                        "gamma_median": float(np.median(gamma)),
                        "gamma_iqr": float(q75 - q25),
                        "median_gap_log": float(np.median(log_T - log_tau)),
                        "max_gap_log": float(np.max(log_T - log_tau)),
                    },
                )
            )
    outside = float(np.mean(below | above))
    logger.info(
        f"[tau-growth] {len(points)} points up to n={n_max}; "
        f"{outside:.4f} of replicas left the growth bracket"
    )
    return ScalingSeries(
        label="tau-growth",
        points=points,
        n_replicas=n_replicas,
        seed=seed,
        parameters={
            "n_max": n_max,
            "lam": lam,
            "handoff_n": handoff_n,
            "bracket_from_n": bracket_from_n,
        },
        extra={
            "target": math.log(2.0),
            "bracket_outside_share": outside,
            "bracket_outside_stderr": bernoulli_stderr(outside, n_replicas),
            "bracket_below_share": float(np.mean(below)),
            "bracket_above_share": float(np.mean(above)),
        },
        samples=gamma.tolist(),
    )


def _martingale_increments(x_prev, eta_prev, x, eta):
    y_prev = x_prev + TURN_BONUS * (eta_prev == 1)
    y = x + TURN_BONUS * (eta == 1)
    return y - y_prev


def martingale_rows(blocks: Iterable[EnsembleBlock]) -> Iterator[MartingaleRow]:
    """Moments of Y_{n+1} - Y_n with Y_n = X_n + 2 * 1{eta_n = 1}, step by step."""
    drift = 0.0
    previous = None
    for block in blocks:
        for step, x, eta in zip(block.n, block.x, block.eta):
            if previous is not None:
                n, x_prev, eta_prev = previous
                dy = _martingale_increments(x_prev, eta_prev, x, eta)
                mean, stderr = mean_stderr(dy)
                drift += mean
                yield MartingaleRow(
                    n=n,
                    mean_increment=mean,
                    stderr=stderr,
                    second_moment=float(np.mean(dy * dy)),
                    turn_frequency=float(np.mean(eta != eta_prev)),
                    max_abs_increment=int(np.max(np.abs(dy))),
                    drift=drift,
                    n_replicas=len(dy),
                )
            previous = (int(step), x, eta)


def martingale_audit(
    n_max: int,
    n_replicas: int,
    mode: Mode = Mode.ASYMPTOTIC,
    seed: int = 0,
    *,
    lam: float = 1.0,
    handoff_n: int = DEFAULT_HANDOFF_N,
    threads: int = 1,
) -> MartingaleAudit:
    """Per-n mean and second moment of the increments of Y_n = X_n + 2 * 1{eta_n = 1}.

    Rows run over n = 1..n_max-1. drift is the compensator A_{n+1} built from
    the empirical mean increments, so M_n = Y_n - A_n.
    """
    mode = Mode(mode)
    if n_max < 3:
        raise ValueError(f"n_max must be at least 3, got {n_max}")
    _check_replicas(n_replicas)
    blocks = _blocks(
        n_max, n_replicas, seed, mode, lam=lam, handoff_n=handoff_n, threads=threads
    )
    rows = list(martingale_rows(blocks))
    worst = max(r.max_abs_increment for r in rows)
    logger.info(f"[martingale {mode.value}] {len(rows)} rows, max |dY| = {worst}")
    return MartingaleAudit(mode=mode.value, seed=seed, n_replicas=n_replicas, rows=rows)


def lil_series(
    tracker: LilTracker,
    label: str,
    n_replicas: int,
    seed: int,
    parameters: dict,
) -> ScalingSeries:
    points = []
    for step, maxima in sorted(tracker.maxima.items()):
        if maxima is None:
            continue
        median, stderr = median_stderr(maxima)
        points.append(
            ScalingPoint(
                index=step,
                value=median,
                stderr=stderr,
                count=n_replicas,
                extra={"mean": float(np.mean(maxima))},
            )
        )
    return ScalingSeries(
        label=label,
        points=points,
        n_replicas=n_replicas,
        seed=seed,
        parameters=parameters,
        extra={
            "limit": LIL_LIMIT,
            "lil_constant": LIL_CONSTANT,
            "normality_p": tracker.normality_pvalue(),
        },
        samples=tracker.running.tolist(),
    )


def lil_scaling(
    n_max: int,
    n_replicas: int,
    seed: int = 0,
    *,
    n_min: int = LIL_FROM_N,
    lam: float = 1.0,
    handoff_n: int = DEFAULT_HANDOFF_N,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> ScalingSeries:
    """Median over replicas of max_{n_min <= m <= n} |X_m| / sqrt(6 m log log m)."""
    if n_max < MIN_LIL_N_MAX:
        raise ValueError(f"n_max must be at least {MIN_LIL_N_MAX}, got {n_max}")
    _check_replicas(n_replicas)
    tracker = LilTracker(n_replicas, n_max, n_min)
    track(
        chain_blocks(
            n_max,
            n_replicas,
            seed,
            lam=lam,
            handoff_n=handoff_n,
            threads=threads,
            block_size=block_size,
        ),
        tracker,
    )
    series = lil_series(
        tracker,
        "lil",
        n_replicas,
        seed,
        {"n_max": n_max, "n_min": n_min, "lam": lam, "handoff_n": handoff_n},
    )
    logger.info(f"[lil] median running max {series.points[-1].value:.4f} at n={n_max}")
    return series


def nt_scaling(
    n_max: int,
    n_replicas: int,
    seed: int = 0,
    *,
    lam: float = 1.0,
    handoff_n: int = DEFAULT_HANDOFF_N,
    threads: int = 1,
) -> ScalingSeries:
    """Mean of n / log log T_n over replicas, for n = 2..n_max.

    At t = T_n exactly n emptyings have happened, so this is N_t / log log t
    read along the emptying times.
    """
    _check_replicas(n_replicas)
    points = []
    for block in chain_blocks(
        n_max, n_replicas, seed, lam=lam, handoff_n=handoff_n, threads=threads
    ):
        for step, log_T in zip(block.n, block.log_T):
            step = int(step)
            if step < 2:
                continue
            log_log, ok = log_log_of_log(log_T)
            if not ok.any():
                continue
            ratio = step / log_log[ok]
            value, stderr = mean_stderr(ratio)
            points.append(
                ScalingPoint(
                    index=step,
                    value=value,
                    stderr=stderr,
                    count=int(ok.sum()),
                    extra={"mean_abs_deviation": float(np.mean(np.abs(ratio - NT_LIMIT)))},
                )
            )
    logger.info(f"[nt] {len(points)} points up to n={n_max}")
    return ScalingSeries(
        label="nt",
        points=points,
        n_replicas=n_replicas,
        seed=seed,
        parameters={"n_max": n_max, "lam": lam, "handoff_n": handoff_n},
        extra={"target": NT_LIMIT, "lil_constant": LIL_CONSTANT},
    )


def recurrence_result(
    tracker: ReturnTracker, label: str, n_replicas: int, seed: int, parameters: dict
) -> EstimateResult:
    point, stderr = mean_stderr(tracker.returns)
    fraction, fraction_stderr = mean_stderr(tracker.changed.astype(float))
    return EstimateResult(
        label=label,
        point=point,
        stderr=stderr,
        n_replicas=n_replicas,
        seed=seed,
        parameters=parameters,
        extra={"sign_change_fraction": fraction, "sign_change_stderr": fraction_stderr},
    )


def recurrence_stats(
    n_max: int,
    n_replicas: int,
    seed: int = 0,
    *,
    lam: float = 1.0,
    handoff_n: int = DEFAULT_HANDOFF_N,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> EstimateResult:
    """Mean number of returns of X_n to 0 up to n_max.

    extra carries the fraction of replicas whose sign changes in
    (n_max / 2, n_max].
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    _check_replicas(n_replicas)
    tracker = ReturnTracker(n_replicas, n_max)
    track(
        chain_blocks(
            n_max,
            n_replicas,
            seed,
            lam=lam,
            handoff_n=handoff_n,
            threads=threads,
            block_size=block_size,
        ),
        tracker,
    )
    result = recurrence_result(
        tracker, "recurrence", n_replicas, seed, {"n_max": n_max, "lam": lam, "handoff_n": handoff_n}
    )
    logger.info(
        f"[recurrence] {result.point:.2f} returns to 0 by n={n_max}; sign changes in the last half "
        f"{result.extra['sign_change_fraction']:.3f} +/- {result.extra['sign_change_stderr']:.3f} "
        f"against {SIGN_CHANGE_TARGET}"
    )
    return result


def queue_concentration(
    n_steps: int,
    n_replicas: int,
    seed: int = 0,
    *,
    lam: float = 1.0,
    threads: int = 1,
) -> ScalingSeries:
    """Q_n(X_{n+1}) / tau_n per n in exact mode, with the fractions inside the queue brackets.

    lower_fraction counts Q_n(X_{n+1}) > lam tau_n - tau_n^(3/4) and
    upper_fraction counts Q_n(X_{n+1}) <= lam T_n + T_n^(3/4).
    """
    _check_replicas(n_replicas)
    paths = exact_paths(n_steps, n_replicas, seed, lam=lam, threads=threads)
    queue = np.array([p.queue_ahead for p in paths], dtype=float).T
    tau = np.exp(np.array([p.log_tau for p in paths]).T)
    elapsed = np.exp(np.array([p.log_T for p in paths]).T)

    points = []
    for i in range(n_steps):
        ratio = queue[i] / tau[i]
        value, stderr = mean_stderr(ratio)
        lower = queue[i] > lam * tau[i] - tau[i] ** 0.75
        upper = queue[i] <= lam * elapsed[i] + elapsed[i] ** 0.75
        points.append(
            ScalingPoint(
                index=i + 1,
                value=value,
                stderr=stderr,
                count=n_replicas,
                extra={
                    "median": float(np.median(ratio)),
                    "lower_fraction": float(lower.mean()),
                    "upper_fraction": float(upper.mean()),
                },
            )
        )
    return ScalingSeries(
        label="queue-concentration",
        points=points,
        n_replicas=n_replicas,
        seed=seed,
        parameters={"n_steps": n_steps, "lam": lam},
        extra={"target": lam},
    )
