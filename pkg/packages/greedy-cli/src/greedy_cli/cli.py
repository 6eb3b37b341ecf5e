import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from greedy_chain.errors import BudgetExceeded, HorizonExceeded

from greedy_cli.commands import COMMANDS, EXIT_HORIZON, EXIT_INVALID
from greedy_cli.config import Command, RunConfig

logger = logging.getLogger(__name__)

EPILOG = """
examples:
  greedy-server simulate --mode asymptotic --n-steps 50 --seed 7
  greedy-server estimate turning --n 20 --replicas 100000 --seed 1
  greedy-server estimate quarter
  greedy-server oracle-check --replicas 10000
  greedy-server sample-zeta --k 20 --n-samples 10000 --method exact
  greedy-server calibrate
"""


def configure_logging() -> None:
    """Send records to stderr; LOG_LEVEL picks the level, INFO if unset or unknown."""
    root = logging.getLogger()
    if root.hasHandlers():
        root.handlers.clear()

    log_handler = logging.StreamHandler()

    log_level_name = os.environ.get("LOG_LEVEL", "INFO").upper()
    log_level = logging._nameToLevel.get(log_level_name, logging.INFO)
    root.setLevel(log_level)

    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    log_handler.setFormatter(formatter)
    root.addHandler(log_handler)


def _options() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; flags left out fall back to file, env and defaults."""
    parent = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parent.add_argument("--config", dest="config_file", help="key=value configuration file")
    parent.add_argument("--lambda", dest="lam", help="arrival rate (default 1.0)")
    parent.add_argument("--mu", help="service rate (default 1.0)")
    parent.add_argument("--mode", help="exact or asymptotic (default asymptotic)")
    parent.add_argument("--n-steps", dest="n_steps", help="emptyings to simulate")
    parent.add_argument("--n-max", dest="n_max", help="last step of a scaling series")
    parent.add_argument("--n", "--n-index", dest="n_index", help="step of a single estimate")
    parent.add_argument("--replicas", "--n-replicas", dest="n_replicas", help="replica count")
    parent.add_argument("--seed", help="base seed (default GSL_SEED or 0)")
    parent.add_argument("--handoff-n", dest="handoff_n", help="exact steps before handoff (default 6)")
    parent.add_argument("--t-max", dest="t_max", help="oracle time horizon (default 1e5)")
    parent.add_argument("--k", help="initial queue length for sample-zeta and levy-ks")
    parent.add_argument("--n-samples", dest="n_samples", help="draws for sampling estimators")
    parent.add_argument("--kappa", help="Poisson mean for poisson-diff")
    parent.add_argument("--threads", help="worker processes (default: number of cores)")
    parent.add_argument("--output", "-o", dest="output_path", help="output file")
    parent.add_argument("--format", help="json, jsonl or csv")
    parent.add_argument("--method", help="auto, exact or levy (sample-zeta)")
    parent.add_argument(
        "--z2-correction",
        dest="z2_correction",
        action="store_true",
        default=argparse.SUPPRESS,
        help="keep the second Gaussian term of the asymptotic recursion",
    )
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greedy-server",
        description="Monte Carlo lab for the critical greedy server on the integers",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parent = _options()
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser(
        Command.SIMULATE.value, parents=[parent], help="simulate trajectories of the chain"
    )
    estimate = subparsers.add_parser(
        Command.ESTIMATE.value, parents=[parent], help="run one Monte Carlo estimator"
    )
    estimate.add_argument(
        "estimator",
        help="turning, tau-growth, martingale, lil, nt, recurrence, poisson-diff, levy-ks or quarter",
    )
    subparsers.add_parser(
        Command.ORACLE_CHECK.value,
        parents=[parent],
        help="compare the chain with the continuous-time simulation",
    )
    subparsers.add_parser(
        Command.SAMPLE_ZETA.value, parents=[parent], help="draw hitting times zeta(k)"
    )
    subparsers.add_parser(
        Command.CALIBRATE.value,
        parents=[parent],
        help="regenerate the stored reference-walk acceptance bands",
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    tag = args.command
    try:
        config = RunConfig(**vars(args))
        logger.info(f"[{tag}] config {json.dumps(config.echo())}")
        return COMMANDS[config.command](config)
    except (HorizonExceeded, BudgetExceeded) as e:
        logger.error(f"[{tag}] {e}")
        return EXIT_HORIZON
    except (ValueError, OSError) as e:
        logger.error(f"[{tag}] {e}")
        return EXIT_INVALID


def run() -> None:
    sys.exit(main())
