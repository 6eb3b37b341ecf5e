import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type

from greedy_chain.trajectory import Mode
from hitting_time.sampler import SamplingMethod
from pydantic import Field, NonNegativeInt, PositiveFloat, PositiveInt, model_validator
from pydantic.fields import FieldInfo
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

# keys the config file may use in place of a field name
KEY_ALIASES = {"lambda": "lam", "replicas": "n_replicas", "config": "config_file"}


class Command(str, Enum):
    SIMULATE = "simulate"
    ESTIMATE = "estimate"
    ORACLE_CHECK = "oracle-check"
    SAMPLE_ZETA = "sample-zeta"
    CALIBRATE = "calibrate"


class Estimator(str, Enum):
    TURNING = "turning"
    TAU_GROWTH = "tau-growth"
    MARTINGALE = "martingale"
    LIL = "lil"
    NT = "nt"
    RECURRENCE = "recurrence"
    POISSON_DIFF = "poisson-diff"
    LEVY_KS = "levy-ks"
    QUARTER = "quarter"


class OutputFormat(str, Enum):
    JSON = "json"
    JSONL = "jsonl"
    CSV = "csv"


def normalize_key(key: str) -> str:
    key = key.strip().replace("-", "_")
    return KEY_ALIASES.get(key, key)


def read_key_values(path: Path) -> Dict[str, str]:
    """Parse a plain key=value file; '#' starts a comment, blank lines are skipped."""
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[normalize_key(key)] = value.strip()
    return values


class KeyValueFileSource(PydanticBaseSettingsSource):
    """Settings read from the file named by config_file, if any."""

    def __init__(self, settings_cls: Type[BaseSettings], path: Optional[Path]):
        super().__init__(settings_cls)
        self.path = path
        self.values = read_key_values(path) if path is not None else {}

    def get_field_value(self, field: FieldInfo, field_name: str) -> Tuple[Any, str, bool]:
        return self.values.get(field_name), field_name, False

    def __call__(self) -> Dict[str, Any]:
        return dict(self.values)


class RunConfig(BaseSettings):
    """Effective configuration of one command.

    Sources, highest priority first: command-line flags, the key=value
    config file, GSL_* environment variables, field defaults.
    """

    command: Command = Field(description="Subcommand to run")
    estimator: Optional[Estimator] = Field(
        description="Estimator run by the estimate command", default=None
    )
    lam: PositiveFloat = Field(description="Arrival rate lambda", default=1.0)
    mu: PositiveFloat = Field(description="Service rate mu", default=1.0)
    mode: Mode = Field(description="exact or asymptotic chain", default=Mode.ASYMPTOTIC)
    n_steps: Optional[PositiveInt] = Field(description="Emptyings to simulate", default=None)
    n_max: Optional[PositiveInt] = Field(description="Last step of a scaling series", default=None)
    n_index: Optional[PositiveInt] = Field(description="Step of a single estimate", default=None)
    n_replicas: Optional[PositiveInt] = Field(description="Independent replicas", default=None)
    seed: NonNegativeInt = Field(description="Base seed of every stream", default=0)
    handoff_n: PositiveInt = Field(description="Exact steps before the asymptotic chain", default=6)
    t_max: PositiveFloat = Field(description="Time horizon of the oracle", default=1.0e5)
    k: Optional[PositiveInt] = Field(description="Initial queue length for sample-zeta", default=None)
    n_samples: Optional[PositiveInt] = Field(description="Draws for sampling estimators", default=None)
    kappa: Optional[PositiveFloat] = Field(description="Poisson mean of poisson-diff", default=None)
    threads: PositiveInt = Field(
        description="Worker processes for exact prefixes",
        default_factory=lambda: os.cpu_count() or 1,
    )
    output_path: Optional[Path] = Field(description="Output file", default=None)
    format: Optional[OutputFormat] = Field(
        description="Output format; jsonl for trajectories and json for summaries by default",
        default=None,
    )
    config_file: Optional[Path] = Field(description="key=value configuration file", default=None)
    z2_correction: bool = Field(
        description="Keep the second Gaussian term of the asymptotic recursion", default=False
    )
    method: SamplingMethod = Field(
        description="Hitting time sampler for sample-zeta", default=SamplingMethod.AUTO
    )

    model_config = SettingsConfigDict(env_prefix="GSL_", extra="forbid")

    @model_validator(mode="after")
    def _estimator_named(self) -> "RunConfig":
        if self.command is Command.ESTIMATE and self.estimator is None:
            raise ValueError("the estimate command needs an estimator name")
        return self

    def require(self, name: str) -> Any:
        value = getattr(self, name)
        if value is None:
            raise ValueError(f"{self.command.value} needs {name}")
        return value

    def echo(self) -> Dict[str, Any]:
        """The configuration as plain JSON values, as embedded in output headers."""
        return self.model_dump(mode="json")

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        config_file = getattr(init_settings, "init_kwargs", {}).get("config_file")
        return (
            init_settings,
            KeyValueFileSource(settings_cls, Path(config_file) if config_file else None),
            env_settings,
        )
