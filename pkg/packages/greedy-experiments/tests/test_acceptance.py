"""Full-size runs of the headline limits; deselected unless run with -m slow."""

import logging
import math
import os

import pytest
from greedy_chain.trajectory import Mode
from greedy_experiments.calibration import load_band
from greedy_experiments.distances import estimate_quarter, levy_ks, poisson_diff_distance
from greedy_experiments.estimators import (
    GROWTH_OUTSIDE_BOUND,
    NT_LIMIT,
    SIGN_CHANGE_TARGET,
    estimate_turning,
    lil_scaling,
    martingale_audit,
    nt_scaling,
    recurrence_stats,
    tau_growth_series,
)
from greedy_experiments.oracle_check import oracle_agreement

pytestmark = pytest.mark.slow

THREADS = os.cpu_count() or 1


def test_quarter_identity():
    result = estimate_quarter(1_000_000, seed=1)
    assert result.extra["quadrature"] == pytest.approx(0.25, abs=1e-8)
    assert abs(result.point - 0.25) <= 0.0013


def test_turning_probability():
    result = estimate_turning(20, 100_000, Mode.ASYMPTOTIC, seed=1, threads=THREADS)
    assert result.within(0.25)


def test_levy_convergence_of_emptying_times():
    near = levy_ks(50, 100_000, seed=2)
    far = levy_ks(5, 100_000, seed=2)
    assert near.ks_statistic <= 0.05
    assert far.ks_statistic - near.ks_statistic > 3 * math.hypot(near.mc_stderr, far.mc_stderr)


def test_double_exponential_growth():
    series = tau_growth_series(50, 1000, seed=3, threads=THREADS)
    assert series.at(50).value == pytest.approx(math.log(2), abs=0.02)
    assert series.extra["bracket_outside_share"] <= GROWTH_OUTSIDE_BOUND
    assert series.at(30).extra["max_gap_log"] < 1e-6
    iqr_40 = series.at(40).extra["gamma_iqr"]
    assert series.at(50).extra["gamma_iqr"] == pytest.approx(iqr_40, rel=0.1)


def test_emptying_count_scaling():
    series = nt_scaling(40, 1000, seed=4, threads=THREADS)
    assert series.at(40).value == pytest.approx(NT_LIMIT, rel=0.05)


def test_martingale_moments():
    audit = martingale_audit(21, 100_000, Mode.ASYMPTOTIC, seed=5, threads=THREADS)
    row = audit.row(20)
    assert row.second_moment == pytest.approx(3.0, abs=0.02 + 4 * 8 * math.sqrt(0.1875 / 1e5))
    assert abs(row.mean_increment) <= 3 * row.stderr
    assert all(r.max_abs_increment <= 3 for r in audit.rows)


def test_lil_band():
    band = load_band("lil")
    series = lil_scaling(100_000, 1000, seed=6, threads=THREADS)
    assert band.contains(series.points[-1].value)
    assert series.extra["normality_p"] > 1e-3


def test_recurrence_surrogate(caplog):
    # Arrange
    caplog.set_level(logging.INFO)
    returns, changes = load_band("returns"), load_band("sign-changes")

    # Act
    result = recurrence_stats(10_000, 1000, seed=7, threads=THREADS)

    # Assert
    fraction = result.extra["sign_change_fraction"]
    stderr = result.extra["sign_change_stderr"]
    assert result.point >= 10
    assert returns.contains(result.point)
    assert changes.contains(fraction)
    # the reference walk itself sits at 0.498 +/- 0.016, so half is checked at 3 sigma
    assert fraction >= SIGN_CHANGE_TARGET - 3 * stderr
    assert f"{fraction:.3f} +/- {stderr:.3f} against 0.5" in caplog.text


def test_oracle_equivalence():
    report = oracle_agreement(10_000, seed=8, threads=THREADS)
    assert report.passed()


def test_poisson_difference_berry_esseen():
    small = poisson_diff_distance(1e2, 1_000_000, seed=9)
    large = poisson_diff_distance(1e4, 1_000_000, seed=9)
    assert large.ks_statistic <= 0.01
    assert small.ks_statistic > large.ks_statistic
