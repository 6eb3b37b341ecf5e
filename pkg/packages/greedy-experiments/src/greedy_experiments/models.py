from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field, model_validator

# rounding allowance in second_moment >= mean_increment^2
MOMENT_SLACK = 1e-9


class EstimateResult(BaseModel):
    """A point estimate with its Monte Carlo standard error."""

    model_config = ConfigDict(ser_json_inf_nan="null")

    label: str = Field(..., description="Name of the estimator")
    point: float = Field(..., description="Point estimate")
    stderr: float = Field(..., ge=0, description="Sample std / sqrt(n_replicas)")
    n_replicas: int = Field(..., ge=1, description="Number of replicas behind the estimate")
    seed: int = Field(..., description="Base seed of the replica streams")
    parameters: Dict[str, Any] = Field(
        default_factory=dict, description="Estimator arguments other than the seed"
    )
    extra: Dict[str, float] = Field(
        default_factory=dict, description="Secondary statistics reported with the estimate"
    )

    def within(self, target: float, n_sigma: float = 3.0) -> bool:
        return abs(self.point - target) <= n_sigma * self.stderr


class ScalingPoint(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="null")

    index: float = Field(..., description="n, or log t")
    value: float
    stderr: float = Field(..., ge=0)
    count: int = Field(..., ge=0, description="Replicas inside the log log domain guard")
    extra: Dict[str, float] = Field(default_factory=dict)


class ScalingSeries(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="null")

    label: str
    points: List[ScalingPoint] = Field(default_factory=list)
    n_replicas: int = Field(..., ge=1)
    seed: int
    parameters: Dict[str, Any] = Field(default_factory=dict)
    extra: Dict[str, float] = Field(default_factory=dict)
    samples: List[float] = Field(
        default_factory=list, description="Per-replica values at the last grid index"
    )

    @model_validator(mode="after")
    def _increasing(self) -> "ScalingSeries":
        indices = [p.index for p in self.points]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError(f"[{self.label}] grid indices must be strictly increasing")
        return self

    def at(self, index: float) -> ScalingPoint:
        for p in self.points:
            if p.index == index:
                return p
        raise KeyError(f"[{self.label}] no point at index {index}")


class MartingaleRow(BaseModel):
    """Moments of dY = Y_{n+1} - Y_n across replicas."""

    n: int = Field(..., ge=1)
    mean_increment: float
    stderr: float = Field(..., ge=0)
    second_moment: float = Field(..., ge=0)
    turn_frequency: float = Field(..., ge=0, le=1, description="Frequency of eta_{n+1} != eta_n")
    max_abs_increment: int = Field(..., ge=0)
    drift: float = Field(..., description="A_{n+1}: cumulative sum of the mean increments")
    n_replicas: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _moments(self) -> "MartingaleRow":
        if self.second_moment < self.mean_increment**2 - MOMENT_SLACK:
            raise ValueError(
                f"[n={self.n}] second moment {self.second_moment} below squared mean "
                f"{self.mean_increment ** 2}"
            )
        return self


class MartingaleAudit(BaseModel):
    label: str = "martingale"
    mode: str
    seed: int
    n_replicas: int = Field(..., ge=1)
    rows: List[MartingaleRow] = Field(default_factory=list)

    def row(self, n: int) -> MartingaleRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(f"no martingale row at n={n}")


class Band(BaseModel):
    """Acceptance band calibrated on the reference correlated walk."""

    label: str
    centre: float
    lo: float
    hi: float
    stderr: float = Field(..., ge=0)
    seed: int
    n_replicas: int = Field(..., ge=1)
    n_max: int = Field(..., ge=1)
    turn_prob: float = Field(0.25, gt=0, lt=1)

    @model_validator(mode="after")
    def _ordered(self) -> "Band":
        if not self.lo <= self.centre <= self.hi:
            raise ValueError(f"[{self.label}] band [{self.lo}, {self.hi}] misses its centre")
        return self

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


class OracleReport(BaseModel):
    """Chi-square comparison of the first four directions under both simulators."""

    lam: float = Field(..., alias="lambda")
    mu: float
    t_max: float
    n_replicas: int = Field(..., ge=1)
    seed: int
    chi2: float = Field(..., ge=0)
    p_value: float = Field(..., ge=0, le=1)
    dof: int = Field(..., ge=0)
    censored_exact: int = Field(0, ge=0)
    censored_oracle: int = Field(0, ge=0)
    table: Dict[str, List[int]] = Field(
        default_factory=dict, description="Direction pattern -> [exact count, oracle count]"
    )

    model_config = ConfigDict(populate_by_name=True)

    def passed(self, threshold: float = 1e-3) -> bool:
        return self.p_value > threshold


class RegimeReport(BaseModel):
    """How a non-critical server behaves over [0, t_max]."""

    lam: float = Field(..., alias="lambda")
    mu: float
    t_max: float
    n_replicas: int = Field(..., ge=1)
    seed: int
    stuck_fraction: float = Field(..., ge=0, le=1)
    stuck_stderr: float = Field(..., ge=0)
    median_direction_changes: float = Field(..., ge=0)
    median_completed_moves: float = Field(..., ge=0)
    censored: int = Field(0, ge=0)
    min_moves: int = Field(5, ge=1, description="Completed moves below which a run is stuck")

    model_config = ConfigDict(populate_by_name=True)
