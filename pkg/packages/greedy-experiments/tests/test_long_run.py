import math

import numpy as np
import pytest
from greedy_chain.ensemble import EnsembleBlock
from greedy_experiments.long_run import (
    LilTracker,
    ReturnTracker,
    lil_checkpoints,
    track,
)


def _block(x, first_n=1):
    x = np.asarray(x, dtype=np.int64)
    steps = x.shape[0]
    previous = np.vstack([np.zeros((1, x.shape[1]), dtype=np.int64), x[:-1]])
    eta = x - previous
    empty = np.empty((0, x.shape[1]))
    return EnsembleBlock(
        n=np.arange(first_n, first_n + steps, dtype=np.int64),
        x=x,
        eta=eta,
        turn=np.zeros_like(x, dtype=bool),
        log_tau=empty,
        log_T=empty,
    )


@pytest.fixture
def paths():
    """Three replicas over eight steps, one column each."""
    return np.array(
        [
            [1, 0, -1, -2, -1, 0, 1, 2],
            [1, 2, 3, 4, 5, 6, 7, 8],
            [1, 0, -1, -2, -3, -4, -5, -6],
        ]
    ).T


def test_returns_and_late_sign_changes(paths):
    # Arrange
    tracker = ReturnTracker(3, n_max=8)

    # Act
    tracker.update(_block(paths))

    # Assert
    assert tracker.returns.tolist() == [2, 0, 1]
    # the third replica changes sign at n = 3, outside (4, 8]
    assert tracker.changed.tolist() == [True, False, False]


def test_split_blocks_give_the_same_counts(paths):
    whole = ReturnTracker(3, n_max=8)
    split = ReturnTracker(3, n_max=8)

    track([_block(paths)], whole)
    track([_block(paths[:3]), _block(paths[3:], first_n=4)], split)

    assert (whole.returns == split.returns).all()
    assert (whole.changed == split.changed).all()


def test_checkpoints_cover_both_ends():
    grid = lil_checkpoints(100, 5000)
    assert grid[0] == 100
    assert grid[-1] == 5000
    assert (np.diff(grid) > 0).all()


def test_lil_tracker_keeps_a_running_max():
    # Arrange
    steps = np.arange(100, 400)
    x = np.where(steps == 150, 60, 0)[:, None] * np.array([1, -1])
    block = _block(x, first_n=100)
    tracker = LilTracker(2, n_max=399, n_min=100, checkpoints=[120, 150, 399])

    # Act
    tracker.update(block)

    # Assert
    peak = 60 / math.sqrt(6 * 150 * math.log(math.log(150)))
    assert tracker.maxima[120].tolist() == [0.0, 0.0]
    assert tracker.maxima[150] == pytest.approx([peak, peak])
    assert tracker.maxima[399] == pytest.approx([peak, peak])
    assert tracker.running == pytest.approx([peak, peak])


def test_lil_tracker_needs_the_log_log_guard():
    with pytest.raises(ValueError):
        LilTracker(5, n_max=1000, n_min=10)


def test_normality_needs_its_step():
    tracker = LilTracker(2, n_max=2000, n_min=100)
    tracker.update(_block(np.ones((10, 2)), first_n=100))
    with pytest.raises(ValueError):
        tracker.normality_pvalue()
