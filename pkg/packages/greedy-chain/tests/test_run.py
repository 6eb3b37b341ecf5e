import importlib
import json
import logging
import math

import pytest
from greedy_chain.errors import HorizonExceeded, OutOfRange
from greedy_chain.exact import step_exact
from greedy_chain.run import asymptotic_prefix, run
from greedy_chain.trajectory import (
    Mode,
    count_emptied,
    read_jsonl,
    server_position,
    write_csv,
    write_jsonl,
)

run_module = importlib.import_module("greedy_chain.run")


@pytest.fixture(scope="module")
def exact_traj():
    return run(4, Mode.EXACT, seed=3)


@pytest.fixture(scope="module")
def asymptotic_traj():
    return run(60, Mode.ASYMPTOTIC, handoff_n=4, seed=3)


def test_same_seed_gives_identical_trajectory():
    first = run(40, Mode.ASYMPTOTIC, handoff_n=4, seed=21)
    second = run(40, Mode.ASYMPTOTIC, handoff_n=4, seed=21)
    assert first.model_dump_json() == second.model_dump_json()


def test_different_replicas_differ():
    a = run(40, Mode.ASYMPTOTIC, handoff_n=4, seed=21, replica=0)
    b = run(40, Mode.ASYMPTOTIC, handoff_n=4, seed=21, replica=1)
    assert a.model_dump_json() != b.model_dump_json()


def test_exact_run_records_every_step(exact_traj):
    assert exact_traj.mode is Mode.EXACT
    assert exact_traj.handoff_n is None
    assert [r.n for r in exact_traj.records] == [1, 2, 3, 4]
    exact_traj.check_steps()
    for r in exact_traj.records:
        assert r.log_T >= math.log(r.n) - 1e-12
        assert r.log_tau >= 0.0


def test_asymptotic_run_hands_off_and_keeps_stepping(asymptotic_traj):
    assert asymptotic_traj.handoff_n == 4
    assert asymptotic_traj.n_steps == 60
    asymptotic_traj.check_steps()
    log_T = asymptotic_traj.log_times()
    assert all(a <= b for a, b in zip(log_T, log_T[1:]))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_steps": 0},
        {"n_steps": 5, "handoff_n": 6},
        {"n_steps": 5, "handoff_n": 0},
    ],
)
def test_run_rejects_bad_arguments(kwargs):
    with pytest.raises(ValueError):
        run(**kwargs)


def test_exact_run_reports_the_failing_step():
    with pytest.raises(HorizonExceeded) as excinfo:
        run(3, Mode.EXACT, seed=0, max_exact_mean=0.5)
    assert excinfo.value.step == 1


def test_asymptotic_run_hands_off_early_at_the_horizon(mocker, caplog):
    """A horizon hit at step 3 hands off after step 2 and the run still reaches n_steps."""
    # Arrange
    caplog.set_level(logging.WARNING)
    calls = {"n": 0}

    def limited_step(state, *args, **kwargs):
        calls["n"] += 1
        if state.n == 2:
            raise HorizonExceeded(3, 2.0**60)
        return step_exact(state, *args, **kwargs)

    mocker.patch.object(run_module, "step_exact", side_effect=limited_step)

    # Act
    traj = run(12, Mode.ASYMPTOTIC, handoff_n=6, seed=1)

    # Assert
    assert traj.handoff_n == 2
    assert traj.n_steps == 12
    traj.check_steps()
    assert "handing off at n=2" in caplog.text


def test_prefix_matches_run_up_to_handoff():
    traj = run(5, Mode.ASYMPTOTIC, handoff_n=5, seed=8, replica=2)
    prefix = asymptotic_prefix(8, 2, 5, keep_records=True)
    last = traj.records[-1]
    assert (prefix.state.n, prefix.state.x, prefix.state.eta) == (5, last.x, last.eta)
    assert prefix.records == traj.records
    assert prefix.handoff_n == 5


def test_count_emptied(exact_traj):
    log_T = exact_traj.log_times()
    assert count_emptied(exact_traj, log_T[0] - 1e-9) == 0
    assert count_emptied(exact_traj, -math.inf) == 0
    for n, value in enumerate(log_T, start=1):
        assert count_emptied(exact_traj, value) == n
    queries = [log_T[0] - 1.0 + 0.25 * i for i in range(40)]
    counts = [count_emptied(exact_traj, q) for q in queries]
    assert counts == sorted(counts)


def test_server_position_at_and_between_emptyings(exact_traj):
    records = exact_traj.records
    t2 = math.exp(records[1].log_T)

    assert server_position(exact_traj, 0.0) == 0.0
    assert server_position(exact_traj, t2) == pytest.approx(records[1].x)
    assert server_position(exact_traj, t2 + 0.5) == pytest.approx(
        records[1].x + 0.5 * (records[2].x - records[1].x)
    )
    assert server_position(exact_traj, t2 + 1.0) == pytest.approx(records[2].x)


def test_server_position_beyond_horizon(exact_traj):
    horizon = math.exp(exact_traj.records[-1].log_T)
    assert server_position(exact_traj, horizon) == pytest.approx(exact_traj.records[-1].x)
    with pytest.raises(OutOfRange):
        server_position(exact_traj, horizon * 2 + 1)


def test_server_position_needs_exact_mode(asymptotic_traj):
    with pytest.raises(ValueError):
        server_position(asymptotic_traj, 1.0)


def test_jsonl_file_has_metadata_then_records(asymptotic_traj, tmp_path):
    # Arrange
    path = tmp_path / "traj.jsonl"

    # Act
    write_jsonl(asymptotic_traj, path, config={"seed": 3})
    lines = path.read_text().splitlines()
    restored = read_jsonl(path)

    # Assert
    header = json.loads(lines[0])["metadata"]
    assert header["mode"] == "asymptotic"
    assert header["lambda"] == 1.0
    assert header["handoff_n"] == 4
    assert header["config"] == {"seed": 3}
    assert set(json.loads(lines[1])) == {"n", "x", "eta", "turn", "tau_log", "T_log"}
    assert len(lines) == 61
    assert restored.records == asymptotic_traj.records
    assert restored.handoff_n == 4


def _reject_constant(name):
    raise ValueError(f"non-standard JSON constant {name}")


def test_far_out_records_serialise_infinite_logs(tmp_path):
    """log tau past the double range is written as null and read back as +inf."""
    # Arrange
    traj = run(1100, Mode.ASYMPTOTIC, handoff_n=3, seed=4)
    path = tmp_path / "far.jsonl"

    # Act
    write_jsonl(traj, path)
    restored = read_jsonl(path)

    # Assert
    lines = path.read_text().splitlines()
    last = json.loads(lines[-1], parse_constant=_reject_constant)
    assert last["tau_log"] is None
    assert last["T_log"] is None
    for line in lines:
        json.loads(line, parse_constant=_reject_constant)
    assert restored.records[-1].log_tau == math.inf
    assert restored.records[-1].log_T == math.inf
    assert restored.records[-1].x == traj.records[-1].x


def test_csv_file_has_commented_metadata_and_header(exact_traj, tmp_path):
    path = tmp_path / "traj.csv"
    write_csv(exact_traj, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    assert json.loads(lines[0][2:])["metadata"]["mode"] == "exact"
    assert lines[1] == "n,x,eta,turn,tau_log,T_log"
    assert len(lines) == 2 + 4
