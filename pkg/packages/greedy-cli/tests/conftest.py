import pytest
from greedy_cli.cli import main


@pytest.fixture(autouse=True)
def keep_log_handlers(mocker):
    """Leave the root logger to pytest so caplog keeps working."""
    return mocker.patch("greedy_cli.cli.configure_logging")


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Drop GSL_* variables from the developer's shell."""
    for name in ("GSL_SEED", "GSL_LAM", "GSL_THREADS", "GSL_N_REPLICAS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def cli(tmp_path, monkeypatch):
    """Run the command line in a scratch directory on a single process."""
    monkeypatch.chdir(tmp_path)

    def invoke(*argv: str) -> int:
        return main([*argv, "--threads", "1"])

    return invoke
