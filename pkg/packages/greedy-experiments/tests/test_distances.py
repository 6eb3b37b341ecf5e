import math

import numpy as np
import pytest
from greedy_experiments.distances import (
    GRID_POINTS,
    estimate_quarter,
    hitting_tail_profile,
    levy_ks,
    normal_quantile_grid,
    poisson_diff_distance,
    poisson_diff_sample,
)
from scipy import stats


@pytest.fixture(scope="module")
def tails():
    return hitting_tail_profile([4, 16, 64], 5000, seed=3)


def test_grid_sits_on_normal_quantiles():
    grid = normal_quantile_grid()

    assert grid.size == GRID_POINTS
    assert (np.diff(grid) > 0).all()
    assert grid == pytest.approx(-grid[::-1])
    levels = stats.norm.cdf(grid / math.sqrt(2))
    assert levels == pytest.approx(np.arange(1, 201) / 201)


def test_poisson_difference_is_close_to_normal_for_large_kappa():
    report = poisson_diff_distance(1e4, 200_000, seed=1)

    assert report.label == "poisson-diff"
    assert report.kappa == 1e4
    assert report.ks_statistic <= 0.01


def test_poisson_distance_shrinks_with_kappa():
    """Lattice effects of order kappa^(-1/2) dominate at kappa = 100."""
    small = poisson_diff_distance(1e2, 200_000, seed=2)
    large = poisson_diff_distance(1e4, 200_000, seed=2)
    noise = math.hypot(small.mc_stderr, large.mc_stderr)
    assert small.ks_statistic - large.ks_statistic > 3 * noise


def test_poisson_difference_is_symmetric():
    d = poisson_diff_sample(50.0, 100_000, np.random.default_rng(5))

    signs = np.sign(d)
    assert abs(signs.mean()) < 3 * signs.std(ddof=1) / math.sqrt(d.size)


def test_kappa_must_be_positive():
    with pytest.raises(ValueError):
        poisson_diff_distance(0.0, 100)


def test_quarter_estimate():
    result = estimate_quarter(100_000, seed=4)

    assert abs(result.point - 0.25) < 4 * result.stderr
    assert result.extra["quadrature"] == pytest.approx(0.25, abs=1e-8)
    assert f"{result.extra['quadrature']:.6f}" == "0.250000"


def test_levy_ks_is_reproducible():
    first = levy_ks(20, 2000, seed=6)
    second = levy_ks(20, 2000, seed=6)

    assert first == second
    assert first.ks_statistic < 0.08


def test_both_tails_thin_out_with_k(tails):
    lower = [p.value for p in tails.points]
    upper = [p.extra["upper"] for p in tails.points]
    assert lower[0] > lower[1] > lower[2]
    assert upper[0] > upper[1] > upper[2]


def test_large_k_tails_match_the_levy_law(tails):
    point = tails.at(64)
    assert point.value == pytest.approx(point.extra["levy_lower"], abs=0.03)
    assert point.extra["upper"] == pytest.approx(point.extra["levy_upper"], abs=0.03)
