import json
import logging
from pathlib import Path

import pytest
from greedy_chain.errors import HorizonExceeded
from greedy_cli.cli import configure_logging
from greedy_experiments.calibration import BANDS_DIR
from greedy_experiments.models import Band, EstimateResult, OracleReport


def _oracle_report(p_value: float) -> OracleReport:
    return OracleReport(
        lam=1.0,
        mu=1.0,
        t_max=1.0e5,
        n_replicas=100,
        seed=0,
        chi2=3.0,
        p_value=p_value,
        dof=15,
        censored_exact=0,
        censored_oracle=0,
        table={"++++": [50, 50], "----": [50, 50]},
    )


def test_simulate_writes_one_jsonl_file(cli, tmp_path, capsys):
    """Metadata line first, then one record per emptying."""
    # Act
    code = cli("simulate", "--mode", "asymptotic", "--n-steps", "50", "--seed", "7", "-o", "traj.jsonl")

    # Assert
    assert code == 0
    lines = (tmp_path / "traj.jsonl").read_text().splitlines()
    assert len(lines) == 51
    header = json.loads(lines[0])["metadata"]
    assert header["config"]["seed"] == 7
    assert header["config"]["n_steps"] == 50
    last = json.loads(lines[-1])
    summary = json.loads(capsys.readouterr().out)
    assert summary["n_steps"] == 50
    assert summary["x"] == last["x"]
    assert summary["T_log"] == last["T_log"]


def _reject_constant(name):
    raise ValueError(f"non-standard JSON constant {name}")


def test_simulate_writes_null_for_logs_past_the_double_range(cli, tmp_path, capsys):
    # Act
    code = cli("simulate", "--n-steps", "1100", "--seed", "4", "-o", "far.jsonl")

    # Assert
    assert code == 0
    summary = json.loads(capsys.readouterr().out, parse_constant=_reject_constant)
    assert summary["T_log"] is None
    lines = (tmp_path / "far.jsonl").read_text().splitlines()
    last = json.loads(lines[-1], parse_constant=_reject_constant)
    assert last["tau_log"] is None


def test_simulate_is_deterministic(cli, tmp_path):
    cli("simulate", "--n-steps", "50", "--seed", "7", "-o", "a.jsonl")
    first = (tmp_path / "a.jsonl").read_text()
    cli("simulate", "--n-steps", "50", "--seed", "7", "-o", "a.jsonl")
    assert (tmp_path / "a.jsonl").read_text() == first


def test_simulate_exact_mode_with_default_path(cli, tmp_path):
    assert cli("simulate", "--mode", "exact", "--n-steps", "3", "--seed", "7") == 0
    lines = (tmp_path / "trajectory-seed7.jsonl").read_text().splitlines()
    assert len(lines) == 1 + 3


def test_simulate_csv_for_several_replicas(cli, tmp_path, capsys):
    # Act
    code = cli(
        "simulate", "--n-steps", "20", "--replicas", "3", "--format", "csv", "-o", "run.csv"
    )

    # Assert
    assert code == 0
    for replica in range(3):
        lines = (tmp_path / f"run-r{replica}.csv").read_text().splitlines()
        assert lines[0].startswith("# ")
        assert lines[1] == "n,x,eta,turn,tau_log,T_log"
        assert len(lines) == 22
    summaries = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert [s["replica"] for s in summaries] == [0, 1, 2]


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--n-steps", "0"],
        ["simulate"],
        ["simulate", "--n-steps", "5", "--format", "json"],
        ["simulate", "--n-steps", "5", "--mode", "sideways"],
        ["estimate", "nosuch"],
        ["estimate"],
        ["oracle-check", "--replicas", "0"],
        ["sample-zeta"],
        ["launch"],
    ],
)
def test_invalid_input_exits_with_2(cli, argv):
    assert cli(*argv) == 2


def test_horizon_exceeded_exits_with_3(cli, mocker, caplog):
    mocker.patch("greedy_cli.commands.run", side_effect=HorizonExceeded(7, 3.0e16))
    with caplog.at_level(logging.ERROR):
        assert cli("simulate", "--mode", "exact", "--n-steps", "9") == 3
    assert "step 7" in caplog.text


def test_estimate_quarter(cli, tmp_path, capsys):
    # Act
    code = cli("estimate", "quarter", "--n-samples", "2000", "--seed", "2")

    # Assert
    assert code == 0
    assert capsys.readouterr().out == "0.250000 (target 0.25)\n"
    written = json.loads((tmp_path / "quarter-seed2.json").read_text())
    assert written["config"]["estimator"] == "quarter"
    assert written["result"]["label"] == "quarter"
    assert written["result"]["n_replicas"] == 2000


def test_estimate_turning_passes_settings_through(cli, mocker, capsys):
    estimate = mocker.patch(
        "greedy_cli.commands.estimate_turning",
        return_value=EstimateResult(
            label="turning", point=0.2512, stderr=0.0014, n_replicas=100_000, seed=1
        ),
    )

    # Act
    code = cli("estimate", "turning", "--n", "20", "--replicas", "100000", "--seed", "1")

    # Assert
    assert code == 0
    estimate.assert_called_once()
    args, kwargs = estimate.call_args
    assert args[:2] == (20, 100_000)
    assert args[3] == 1
    assert kwargs["threads"] == 1
    assert capsys.readouterr().out == "0.251200 +/- 0.001400 (target 0.25)\n"


def test_estimate_uses_desk_defaults(cli, mocker):
    estimate = mocker.patch("greedy_cli.commands.nt_scaling")
    estimate.return_value.points = [mocker.MagicMock(value=1.4, stderr=0.01, index=40)]
    mocker.patch("greedy_cli.commands.write_summary")
    assert cli("estimate", "nt") == 0
    assert estimate.call_args.args[:2] == (40, 1000)


def test_estimate_tau_growth_as_csv(cli, tmp_path, capsys):
    # Act
    code = cli(
        "estimate", "tau-growth", "--n-max", "10", "--replicas", "40", "--format", "csv"
    )

    # Assert
    assert code == 0
    lines = (tmp_path / "tau-growth-seed0.csv").read_text().splitlines()
    assert json.loads(lines[0][2:])["config"]["n_max"] == 10
    assert lines[1].startswith("index,value,stderr,count")
    assert "target log 2" in capsys.readouterr().out


def test_oracle_check_exit_code_follows_the_p_value(cli, mocker, capsys):
    mocker.patch("greedy_cli.commands.oracle_agreement", return_value=_oracle_report(0.4))
    assert cli("oracle-check", "--replicas", "100") == 0
    assert "p=0.4" in capsys.readouterr().out

    mocker.patch("greedy_cli.commands.oracle_agreement", return_value=_oracle_report(1e-5))
    assert cli("oracle-check", "--replicas", "100") == 1


def test_oracle_check_runs_the_real_comparison(cli, tmp_path):
    assert cli("oracle-check", "--replicas", "400", "--t-max", "1e4", "--seed", "1") == 0
    written = json.loads((tmp_path / "oracle-check-seed1.json").read_text())
    assert written["result"]["lambda"] == 1.0
    assert len(written["result"]["table"]) == 16


def test_transient_regime_reports_stuck_fraction(cli, tmp_path, capsys):
    # Act
    code = cli("oracle-check", "--lambda", "2", "--mu", "1", "--t-max", "50", "--replicas", "20")

    # Assert
    assert code == 0
    assert capsys.readouterr().out.startswith("stuck_fraction=")
    written = json.loads((tmp_path / "regime-seed0.json").read_text())
    assert 0.0 <= written["result"]["stuck_fraction"] <= 1.0


@pytest.mark.parametrize("method", ["exact", "levy"])
def test_sample_zeta_writes_samples(cli, tmp_path, capsys, method):
    # Act
    code = cli(
        "sample-zeta", "--k", "5", "--n-samples", "300", "--method", method, "--format", "csv"
    )

    # Assert
    assert code == 0
    lines = (tmp_path / "zeta-k5-seed0.csv").read_text().splitlines()
    assert lines[1] == "zeta"
    assert len(lines) == 302
    assert all(float(v) > 0 for v in lines[2:])
    assert capsys.readouterr().out.startswith("median ")


def _write_returns_band(directory):
    band = Band(
        label="returns",
        centre=47.3,
        lo=40.0,
        hi=54.6,
        stderr=1.7,
        seed=20_240_125,
        n_replicas=1000,
        n_max=10_000,
    )
    path = Path(directory) / "returns.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(band.model_dump_json())
    return [path]


def test_calibrate_writes_bands_where_asked(cli, mocker, capsys):
    # Arrange
    write = mocker.patch("greedy_cli.commands.write_bands", side_effect=_write_returns_band)

    # Act
    code = cli("calibrate", "-o", "bands")

    # Assert
    assert code == 0
    assert write.call_args.args[0] == Path("bands")
    assert capsys.readouterr().out == "returns [40, 54.6] -> bands/returns.json\n"


def test_calibrate_defaults_to_the_stored_bands(cli, mocker):
    write = mocker.patch("greedy_cli.commands.write_bands", return_value=[])
    assert cli("calibrate") == 0
    assert write.call_args.args[0] == BANDS_DIR


def test_configure_logging_reads_log_level(monkeypatch):
    root = logging.getLogger()
    saved_handlers, saved_level = root.handlers[:], root.level
    try:
        monkeypatch.setenv("LOG_LEVEL", "debug")
        configure_logging()
        assert root.level == logging.DEBUG
        assert len(root.handlers) == 1

        monkeypatch.setenv("LOG_LEVEL", "chatty")
        configure_logging()
        assert root.level == logging.INFO
        assert len(root.handlers) == 1
    finally:
        root.handlers[:] = saved_handlers
        root.setLevel(saved_level)
