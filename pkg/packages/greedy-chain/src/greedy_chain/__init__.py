from greedy_chain.asymptotic import AsymptoticState, handoff, step_asymptotic
from greedy_chain.ensemble import ChainEnsemble, EnsembleBlock, compute_prefixes
from greedy_chain.errors import BudgetExceeded, GreedyServerError, HorizonExceeded, OutOfRange
from greedy_chain.exact import step_exact
from greedy_chain.oracle import Event, EventKind, EventLog, continuous_oracle
from greedy_chain.run import asymptotic_prefix, run
from greedy_chain.state import (
    UNINSPECTED,
    ChainState,
    Count,
    LogScalar,
    SiteState,
    init,
    next_direction,
)
from greedy_chain.trajectory import (
    Mode,
    Trajectory,
    TrajectoryRecord,
    count_emptied,
    read_jsonl,
    server_position,
    write_csv,
    write_jsonl,
)

__all__ = [
    "UNINSPECTED",
    "AsymptoticState",
    "BudgetExceeded",
    "ChainEnsemble",
    "ChainState",
    "Count",
    "EnsembleBlock",
    "Event",
    "EventKind",
    "EventLog",
    "GreedyServerError",
    "HorizonExceeded",
    "LogScalar",
    "Mode",
    "OutOfRange",
    "SiteState",
    "Trajectory",
    "TrajectoryRecord",
    "asymptotic_prefix",
    "compute_prefixes",
    "continuous_oracle",
    "count_emptied",
    "handoff",
    "init",
    "next_direction",
    "read_jsonl",
    "run",
    "server_position",
    "step_asymptotic",
    "step_exact",
    "write_csv",
    "write_jsonl",
]
