"""Acceptance bands drawn from the limiting correlated walk.

A band is the reference statistic plus or minus 3 sqrt(2) standard errors,
the spread of a difference between two independent estimates of the same
size. The bands the acceptance runs use are stored as JSON under bands/ and
regenerate byte for byte from CALIBRATION_SEED with write_bands().
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Tuple

from greedy_chain.ensemble import DEFAULT_BLOCK

from greedy_experiments.estimators import MIN_LIL_N_MAX, recurrence_result
from greedy_experiments.long_run import LIL_FROM_N, LilTracker, ReturnTracker, track
from greedy_experiments.models import Band
from greedy_experiments.reference import LIMIT_TURN_PROB, CorrelatedWalkEnsemble
from greedy_experiments.summary import median_stderr

logger = logging.getLogger(__name__)

BAND_SIGMAS = 3.0 * math.sqrt(2.0)
CALIBRATION_SEED = 20_240_125
BANDS_DIR = Path(__file__).parent / "bands"
# sizes of the stored bands, matching the full-size acceptance runs
STORED_LIL = {"n_max": 100_000, "n_replicas": 1000}
STORED_RECURRENCE = {"n_max": 10_000, "n_replicas": 1000}
STORED_LABELS = ("lil", "returns", "sign-changes")


def _band(
    label: str, centre: float, stderr: float, seed: int, n_replicas: int, n_max: int, turn_prob: float
) -> Band:
    half = BAND_SIGMAS * stderr
    band = Band(
        label=label,
        centre=centre,
        lo=centre - half,
        hi=centre + half,
        stderr=stderr,
        seed=seed,
        n_replicas=n_replicas,
        n_max=n_max,
        turn_prob=turn_prob,
    )
    logger.info(f"[calibrate {label}] [{band.lo:.4f}, {band.hi:.4f}] from seed {seed}")
    return band


def calibrate_lil_band(
    n_max: int,
    n_replicas: int,
    seed: int = CALIBRATION_SEED,
    *,
    n_min: int = LIL_FROM_N,
    turn_prob: float = LIMIT_TURN_PROB,
    block_size: int = DEFAULT_BLOCK,
) -> Band:
    """Band for the median running max of |X_n| / sqrt(6 n log log n) at n_max."""
    if n_max < MIN_LIL_N_MAX:
        raise ValueError(f"n_max must be at least {MIN_LIL_N_MAX}, got {n_max}")
    walk = CorrelatedWalkEnsemble(n_replicas, turn_prob, seed)
    tracker = LilTracker(n_replicas, n_max, n_min, checkpoints=[n_max])
    track(walk.iter_blocks(n_max, block_size), tracker)
    centre, stderr = median_stderr(tracker.running)
    return _band("lil", centre, stderr, seed, n_replicas, n_max, turn_prob)


def calibrate_recurrence(
    n_max: int,
    n_replicas: int,
    seed: int = CALIBRATION_SEED,
    *,
    turn_prob: float = LIMIT_TURN_PROB,
    block_size: int = DEFAULT_BLOCK,
) -> Tuple[Band, Band]:
    """Bands for the mean number of returns to 0 and for the sign-change fraction."""
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    walk = CorrelatedWalkEnsemble(n_replicas, turn_prob, seed)
    tracker = ReturnTracker(n_replicas, n_max)
    track(walk.iter_blocks(n_max, block_size), tracker)
    result = recurrence_result(tracker, "recurrence-reference", n_replicas, seed, {})
    returns = _band("returns", result.point, result.stderr, seed, n_replicas, n_max, turn_prob)
    changes = _band(
        "sign-changes",
        result.extra["sign_change_fraction"],
        result.extra["sign_change_stderr"],
        seed,
        n_replicas,
        n_max,
        turn_prob,
    )
    return returns, changes


def stored_bands() -> Dict[str, Band]:
    """Recompute every stored band from CALIBRATION_SEED, keyed by label."""
    returns, changes = calibrate_recurrence(**STORED_RECURRENCE)
    return {"lil": calibrate_lil_band(**STORED_LIL), "returns": returns, "sign-changes": changes}


def band_json(band: Band) -> str:
    return band.model_dump_json(indent=2) + "\n"


def write_bands(directory: Path = BANDS_DIR) -> List[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for label, band in stored_bands().items():
        path = directory / f"{label}.json"
        path.write_text(band_json(band))
        paths.append(path)
    logger.info(f"[calibrate] wrote {len(paths)} bands to {directory}")
    return paths


def load_band(label: str, directory: Path = BANDS_DIR) -> Band:
    path = Path(directory) / f"{label}.json"
    if not path.exists():
        raise FileNotFoundError(f"no stored band at {path}; run `greedy-server calibrate`")
    return Band.model_validate_json(path.read_text())
