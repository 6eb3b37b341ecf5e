"""One function per subcommand; each returns the process exit code."""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
from greedy_chain.run import run
from greedy_chain.streams import SAMPLING, stream
from greedy_chain.trajectory import Trajectory, write_csv, write_jsonl
from greedy_experiments import (
    BANDS_DIR,
    LIL_CONSTANT,
    Band,
    ScalingPoint,
    ScalingSeries,
    estimate_quarter,
    estimate_turning,
    levy_ks,
    lil_scaling,
    martingale_audit,
    nt_scaling,
    oracle_agreement,
    poisson_diff_distance,
    recurrence_stats,
    regime_report,
    tau_growth_series,
    write_bands,
)
from hitting_time.sampler import (
    CriticalQueueParams,
    HittingSampler,
    SamplingMethod,
    sample_levy,
    sample_zeta_walk_batch,
)
from hitting_time.special import levy_median
from pydantic import BaseModel

from greedy_cli.config import Command, Estimator, OutputFormat, RunConfig
from greedy_cli.output import summary_path, write_summary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TEST_FAILED = 1
EXIT_INVALID = 2
EXIT_HORIZON = 3

ORACLE_REPLICAS = 10_000
ZETA_SAMPLES = 10_000

# desk-scale sizes used when the command line leaves them out
ESTIMATOR_DEFAULTS: Dict[Estimator, Dict[str, float]] = {
    Estimator.TURNING: {"n_index": 20, "n_replicas": 10_000},
    Estimator.TAU_GROWTH: {"n_max": 50, "n_replicas": 1000},
    Estimator.MARTINGALE: {"n_max": 21, "n_replicas": 10_000},
    Estimator.LIL: {"n_max": 100_000, "n_replicas": 1000},
    Estimator.NT: {"n_max": 40, "n_replicas": 1000},
    Estimator.RECURRENCE: {"n_max": 10_000, "n_replicas": 1000},
    Estimator.POISSON_DIFF: {"kappa": 1.0e4, "n_samples": 1_000_000},
    Estimator.LEVY_KS: {"k": 50, "n_samples": 100_000},
    Estimator.QUARTER: {"n_samples": 1_000_000},
}


def _setting(config: RunConfig, name: str):
    value = getattr(config, name)
    if value is None:
        value = ESTIMATOR_DEFAULTS[config.estimator][name]
    return value


def _last_point(series: ScalingSeries) -> ScalingPoint:
    if not series.points:
        raise ValueError(f"[{series.label}] no step cleared the log log guard")
    return series.points[-1]


def _run_replica(replica: int, **kwargs) -> Trajectory:
    return run(replica=replica, **kwargs)


def _replica_path(base: Path, replica: int, n_replicas: int) -> Path:
    if n_replicas == 1:
        return base
    return base.with_name(f"{base.stem}-r{replica}{base.suffix}")


def cmd_simulate(config: RunConfig) -> int:
    """Write one trajectory file per replica and print a summary line for each."""
    n_steps = config.require("n_steps")
    fmt = config.format or OutputFormat.JSONL
    if fmt is OutputFormat.JSON:
        raise ValueError("trajectories are written as jsonl or csv, not json")
    n_replicas = config.n_replicas or 1
    base = config.output_path or Path(f"trajectory-seed{config.seed}.{fmt.value}")
    job = partial(
        _run_replica,
        n_steps=n_steps,
        mode=config.mode,
        handoff_n=min(config.handoff_n, n_steps),
        seed=config.seed,
        lam=config.lam,
        z2_correction=config.z2_correction,
    )
    if config.threads > 1 and n_replicas > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as executor:
            trajectories = list(executor.map(job, range(n_replicas)))
    else:
        trajectories = [job(replica) for replica in range(n_replicas)]

    writer = write_csv if fmt is OutputFormat.CSV else write_jsonl
    for replica, traj in enumerate(trajectories):
        path = _replica_path(base, replica, n_replicas)
        writer(traj, path, config=config.echo())
        last = traj.records[-1]
        summary = {
            "replica": replica,
            "n_steps": traj.n_steps,
            "x": last.x,
            "T_log": last.log_T if math.isfinite(last.log_T) else None,
            "turns": sum(r.turn for r in traj.records),
            "path": str(path),
        }
        print(json.dumps(summary, allow_nan=False))
    return EXIT_OK


def _turning(config: RunConfig) -> Tuple[BaseModel, str]:
    result = estimate_turning(
        _setting(config, "n_index"),
        _setting(config, "n_replicas"),
        config.mode,
        config.seed,
        lam=config.lam,
        handoff_n=config.handoff_n,
        threads=config.threads,
    )
    line = f"{result.point:.6f} +/- {result.stderr:.6f} (target 0.25)"
    return result, line


def _tau_growth(config: RunConfig) -> Tuple[BaseModel, str]:
    series = tau_growth_series(
        _setting(config, "n_max"),
        _setting(config, "n_replicas"),
        config.seed,
        lam=config.lam,
        handoff_n=config.handoff_n,
        threads=config.threads,
    )
    last = _last_point(series)
    line = (
        f"{last.value:.6f} +/- {last.stderr:.6f} at n={last.index:g} "
        f"(target log 2 = {math.log(2.0):.6f})"
    )
    return series, line


def _martingale(config: RunConfig) -> Tuple[BaseModel, str]:
    audit = martingale_audit(
        _setting(config, "n_max"),
        _setting(config, "n_replicas"),
        config.mode,
        config.seed,
        lam=config.lam,
        handoff_n=config.handoff_n,
        threads=config.threads,
    )
    last = audit.rows[-1]
    line = (
        f"E[dY^2] = {last.second_moment:.6f}, E[dY] = {last.mean_increment:.6f} "
        f"+/- {last.stderr:.6f} at n={last.n} (target 3)"
    )
    return audit, line


def _lil(config: RunConfig) -> Tuple[BaseModel, str]:
    series = lil_scaling(
        _setting(config, "n_max"),
        _setting(config, "n_replicas"),
        config.seed,
        lam=config.lam,
        handoff_n=config.handoff_n,
        threads=config.threads,
    )
    last = _last_point(series)
    line = (
        f"{last.value:.6f} +/- {last.stderr:.6f} at n={last.index:g} "
        f"(target 1; in continuous time sqrt(6/log 2) = {LIL_CONSTANT:.6f})"
    )
    return series, line


def _nt(config: RunConfig) -> Tuple[BaseModel, str]:
    series = nt_scaling(
        _setting(config, "n_max"),
        _setting(config, "n_replicas"),
        config.seed,
        lam=config.lam,
        handoff_n=config.handoff_n,
        threads=config.threads,
    )
    last = _last_point(series)
    line = (
        f"{last.value:.6f} +/- {last.stderr:.6f} at n={last.index:g} "
        f"(target 1/log 2 = {1.0 / math.log(2.0):.6f})"
    )
    return series, line


def _recurrence(config: RunConfig) -> Tuple[BaseModel, str]:
    result = recurrence_stats(
        _setting(config, "n_max"),
        _setting(config, "n_replicas"),
        config.seed,
        lam=config.lam,
        handoff_n=config.handoff_n,
        threads=config.threads,
    )
    line = (
        f"{result.point:.3f} +/- {result.stderr:.3f} returns to 0, "
        f"sign change in the second half for {result.extra['sign_change_fraction']:.4f}"
    )
    return result, line


def _poisson_diff(config: RunConfig) -> Tuple[BaseModel, str]:
    report = poisson_diff_distance(
        _setting(config, "kappa"), _setting(config, "n_samples"), config.seed
    )
    return report, f"{report.ks_statistic:.6f} (noise {report.mc_stderr:.6f})"


def _levy_ks(config: RunConfig) -> Tuple[BaseModel, str]:
    report = levy_ks(
        _setting(config, "k"), _setting(config, "n_samples"), config.seed, lam=config.lam
    )
    return report, f"{report.ks_statistic:.6f} (noise {report.mc_stderr:.6f})"


def _quarter(config: RunConfig) -> Tuple[BaseModel, str]:
    result = estimate_quarter(_setting(config, "n_samples"), config.seed)
    return result, f"{result.extra['quadrature']:.6f} (target 0.25)"


ESTIMATORS: Dict[Estimator, Callable[[RunConfig], Tuple[BaseModel, str]]] = {
    Estimator.TURNING: _turning,
    Estimator.TAU_GROWTH: _tau_growth,
    Estimator.MARTINGALE: _martingale,
    Estimator.LIL: _lil,
    Estimator.NT: _nt,
    Estimator.RECURRENCE: _recurrence,
    Estimator.POISSON_DIFF: _poisson_diff,
    Estimator.LEVY_KS: _levy_ks,
    Estimator.QUARTER: _quarter,
}


def cmd_estimate(config: RunConfig) -> int:
    """Run one estimator, write its summary file and print a one-line summary."""
    estimator = config.require("estimator")
    result, line = ESTIMATORS[estimator](config)
    write_summary(result, config, summary_path(config, estimator.value))
    print(line)
    return EXIT_OK


def cmd_oracle_check(config: RunConfig) -> int:
    """Chi-square agreement with the oracle when lam == mu, a regime report otherwise."""
    n_replicas = config.n_replicas or ORACLE_REPLICAS
    if config.lam == config.mu:
        report = oracle_agreement(
            n_replicas,
            config.seed,
            config.t_max,
            lam=config.lam,
            mu=config.mu,
            threads=config.threads,
        )
        write_summary(report, config, summary_path(config, "oracle-check"))
        print(f"chi2={report.chi2:.4f} dof={report.dof} p={report.p_value:.4g}")
        if not report.passed():
            logger.error(f"[oracle-check] p={report.p_value:.3g} is below the 0.001 threshold")
            return EXIT_TEST_FAILED
        return EXIT_OK

    report = regime_report(config.lam, config.mu, config.t_max, n_replicas, config.seed)
    write_summary(report, config, summary_path(config, "regime"))
    print(
        f"stuck_fraction={report.stuck_fraction:.4f} +/- {report.stuck_stderr:.4f} "
        f"median_direction_changes={report.median_direction_changes:g}"
    )
    return EXIT_OK


def _write_samples(times: np.ndarray, config: RunConfig, path: Path, fmt: OutputFormat) -> None:
    config_json = json.dumps(config.echo())
    values: List[float] = times.tolist()
    with open(path, "w", encoding="utf-8", newline="") as f:
        if fmt is OutputFormat.JSON:
            f.write(f'{{"config": {config_json}, "samples": {json.dumps(values)}}}\n')
        elif fmt is OutputFormat.JSONL:
            f.write(f'{{"config": {config_json}}}\n')
            f.writelines(f'{{"zeta": {v!r}}}\n' for v in values)
        else:
            f.write(f'# {{"config": {config_json}}}\n')
            f.write("zeta\n")
            f.writelines(f"{v!r}\n" for v in values)
    logger.info(f"[sample-zeta] wrote {len(values)} samples to {path}")


def cmd_sample_zeta(config: RunConfig) -> int:
    """Draw zeta(k), write the samples and compare their median with the Levy scaling."""
    k = config.require("k")
    n_samples = config.n_samples or ZETA_SAMPLES
    fmt = config.format or OutputFormat.JSONL
    sampler = HittingSampler(params=CriticalQueueParams(lam=config.lam), method=config.method)
    rng = stream(config.seed, SAMPLING)
    scale = k**2 / (2.0 * config.lam)
    if sampler.resolve(k) is SamplingMethod.EXACT_WALK:
        times, _ = sample_zeta_walk_batch(k, n_samples, sampler, rng)
    else:
        times = scale * sample_levy(rng, n_samples)

    path = config.output_path or Path(f"zeta-k{k}-seed{config.seed}.{fmt.value}")
    _write_samples(times, config, path, fmt)
    print(f"median {np.median(times):.6g} (levy {scale * levy_median():.6g})")
    return EXIT_OK


def cmd_calibrate(config: RunConfig) -> int:
    """Recompute the stored acceptance bands from their seed; -o picks another directory."""
    directory = config.output_path or BANDS_DIR
    for path in write_bands(directory):
        band = Band.model_validate_json(path.read_text())
        print(f"{band.label} [{band.lo:.6g}, {band.hi:.6g}] -> {path}")
    return EXIT_OK


COMMANDS: Dict[Command, Callable[[RunConfig], int]] = {
    Command.SIMULATE: cmd_simulate,
    Command.ESTIMATE: cmd_estimate,
    Command.ORACLE_CHECK: cmd_oracle_check,
    Command.SAMPLE_ZETA: cmd_sample_zeta,
    Command.CALIBRATE: cmd_calibrate,
}
