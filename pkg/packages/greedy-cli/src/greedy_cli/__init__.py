from greedy_cli.cli import build_parser, configure_logging, main
from greedy_cli.config import Command, Estimator, OutputFormat, RunConfig

__all__ = [
    "Command",
    "Estimator",
    "OutputFormat",
    "RunConfig",
    "build_parser",
    "configure_logging",
    "main",
]
