"""Per-step records of one replica, time queries on them, and their file formats."""

import bisect
import csv
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from greedy_chain.errors import OutOfRange

logger = logging.getLogger(__name__)

# log-domain values are written under keys ending in _log
COLUMNS = ["n", "x", "eta", "turn", "tau_log", "T_log"]


class Mode(str, Enum):
    EXACT = "exact"
    ASYMPTOTIC = "asymptotic"


class TrajectoryRecord(BaseModel):
    """State right after the n-th emptying; log values may be +inf far out, written as null."""

    model_config = ConfigDict(populate_by_name=True, ser_json_inf_nan="null")

    n: int = Field(..., ge=1)
    x: int
    eta: int = Field(..., description="Last move, +1 or -1")
    turn: bool = Field(..., description="Whether eta differs from the previous move")
    log_tau: float = Field(..., alias="tau_log", description="log of the n-th inter-emptying time")
    log_T: float = Field(..., alias="T_log", description="log of the n-th emptying time")

    @field_validator("log_tau", "log_T", mode="before")
    @classmethod
    def _null_is_infinite(cls, value: Any) -> Any:
        # JSON has no infinity; log times past the double range are written as null
        return math.inf if value is None else value


class TrajectoryMetadata(BaseModel):
    model_config = ConfigDict(populate_by_name=True, ser_json_inf_nan="null")

    mode: Mode
    seed: int
    handoff_n: Optional[int] = None
    lam: float = Field(1.0, alias="lambda")
    approximations: List[str] = Field(default_factory=list)
    n_steps: int = 0
    config: Dict[str, Any] = Field(
        default_factory=dict, description="Effective run configuration"
    )


class Trajectory(BaseModel):
    """Records for n = 1..N; X_0 = 0 and T_0 = 0 are implied."""

    model_config = ConfigDict(ser_json_inf_nan="null")

    records: List[TrajectoryRecord] = Field(default_factory=list)
    mode: Mode = Mode.EXACT
    seed: int = 0
    handoff_n: Optional[int] = None
    lam: float = 1.0
    approximations: List[str] = Field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return len(self.records)

    def positions(self) -> List[int]:
        return [r.x for r in self.records]

    def log_times(self) -> List[float]:
        return [r.log_T for r in self.records]

    def metadata(self, config: Optional[Dict[str, Any]] = None) -> TrajectoryMetadata:
        return TrajectoryMetadata(
            mode=self.mode,
            seed=self.seed,
            handoff_n=self.handoff_n,
            lam=self.lam,
            approximations=sorted(self.approximations),
            n_steps=self.n_steps,
            config=config or {},
        )

    def check_steps(self) -> None:
        """Raise ValueError unless every move is to a neighbour and turns match direction flips."""
        prev_x, prev_eta = 0, None
        for r in self.records:
            if abs(r.x - prev_x) != 1 or r.x - prev_x != r.eta:
                raise ValueError(f"[n={r.n}] move from {prev_x} to {r.x} with eta={r.eta}")
            if r.turn != (prev_eta is not None and r.eta != prev_eta):
                raise ValueError(f"[n={r.n}] turn flag does not match the direction change")
            prev_x, prev_eta = r.x, r.eta


def count_emptied(traj: Trajectory, log_t_query: float) -> int:
    """N_t: the number of emptyings completed by time exp(log_t_query)."""
    return bisect.bisect_right(traj.log_times(), log_t_query)


def server_position(traj: Trajectory, t_query: float) -> float:
    """Server location at time t_query, interpolating linearly during the unit travel."""
    if traj.mode is not Mode.EXACT:
        raise ValueError("server_position needs an exact-mode trajectory")
    if t_query < 0:
        raise ValueError(f"t_query must be non-negative, got {t_query}")
    horizon = math.exp(traj.records[-1].log_T) if traj.records else 0.0
    if t_query > horizon:
        raise OutOfRange(t_query, horizon)

    n = count_emptied(traj, math.log(t_query)) if t_query > 0 else 0
    x_n = traj.records[n - 1].x if n > 0 else 0
    if n == traj.n_steps:
        return float(x_n)
    t_n = math.exp(traj.records[n - 1].log_T) if n > 0 else 0.0
    x_next = traj.records[n].x
    elapsed = t_query - t_n
    if elapsed >= 1.0:
        return float(x_next)
    return x_n + elapsed * (x_next - x_n)


def _metadata_line(traj: Trajectory, config: Optional[Dict[str, Any]]) -> str:
    metadata = traj.metadata(config).model_dump_json(by_alias=True)
    return f'{{"metadata": {metadata}}}'


def write_jsonl(
    traj: Trajectory, path: Union[str, Path], config: Optional[Dict[str, Any]] = None
) -> None:
    """One metadata line, then one JSON object per step."""
    with open(path, "w") as f:
        f.write(_metadata_line(traj, config) + "\n")
        for record in traj.records:
            f.write(record.model_dump_json(by_alias=True) + "\n")
    logger.info(f"[seed {traj.seed}] wrote {traj.n_steps} records to {path}")


def write_csv(
    traj: Trajectory, path: Union[str, Path], config: Optional[Dict[str, Any]] = None
) -> None:
    """A '#'-prefixed metadata line, a header row, then one row per step."""
    with open(path, "w", newline="") as f:
        f.write("# " + _metadata_line(traj, config) + "\n")
        writer = csv.writer(f)
        writer.writerow(COLUMNS)
        for r in traj.records:
            writer.writerow([r.n, r.x, r.eta, int(r.turn), repr(r.log_tau), repr(r.log_T)])
    logger.info(f"[seed {traj.seed}] wrote {traj.n_steps} rows to {path}")


def read_jsonl(path: Union[str, Path]) -> Trajectory:
    with open(path) as f:
        lines = [line for line in f if line.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    header = json.loads(lines[0])
    if "metadata" not in header:
        raise ValueError(f"{path} does not start with a metadata line")
    metadata = TrajectoryMetadata.model_validate(header["metadata"])
    records = [TrajectoryRecord.model_validate(json.loads(line)) for line in lines[1:]]
    return Trajectory(
        records=records,
        mode=metadata.mode,
        seed=metadata.seed,
        handoff_n=metadata.handoff_n,
        lam=metadata.lam,
        approximations=metadata.approximations,
    )
