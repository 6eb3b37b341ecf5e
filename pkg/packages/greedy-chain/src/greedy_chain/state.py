"""Configuration of the greedy server after n emptyings."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Set, Tuple, Union

import numpy as np


class Uninspected(Enum):
    """Marker for a site whose queue has never been looked at."""

    UNINSPECTED = "*"

    def __repr__(self) -> str:
        return "UNINSPECTED"


UNINSPECTED = Uninspected.UNINSPECTED


@dataclass(frozen=True)
class Count:
    c: int


SiteState = Union[Uninspected, Count]


@dataclass(frozen=True, order=True)
class LogScalar:
    """A non-negative quantity stored as its natural log; -inf encodes 0."""

    log_value: float = -math.inf

    @classmethod
    def zero(cls) -> "LogScalar":
        return cls(-math.inf)

    @classmethod
    def of(cls, value: float) -> "LogScalar":
        if value < 0:
            raise ValueError(f"LogScalar holds non-negative values, got {value}")
        return cls(math.log(value) if value > 0 else -math.inf)

    def __add__(self, other: "LogScalar") -> "LogScalar":
        return LogScalar(float(np.logaddexp(self.log_value, other.log_value)))

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf


@dataclass
class ChainState:
    """Queues, server site, last move and elapsed time after n emptyings.

    ``queues`` only holds inspected sites; a missing key means the site is
    uninspected. Counts are Python ints and therefore exact.
    """

    queues: Dict[int, int]
    x: int = 0
    eta: Optional[int] = None
    t: LogScalar = field(default_factory=LogScalar.zero)
    n: int = 0
    log_tau: float = -math.inf
    approximations: Set[str] = field(default_factory=set)

    def site(self, y: int) -> SiteState:
        if y in self.queues:
            return Count(self.queues[y])
        return UNINSPECTED

    def inspected_interval(self) -> Tuple[int, int]:
        return min(self.queues), max(self.queues)

    def copy(self) -> "ChainState":
        return ChainState(
            queues=dict(self.queues),
            x=self.x,
            eta=self.eta,
            t=self.t,
            n=self.n,
            log_tau=self.log_tau,
            approximations=set(self.approximations),
        )

    def check_invariants(self) -> None:
        """Raise ValueError if the configuration is not one the chain can reach."""
        if self.queues.get(self.x) != 0:
            raise ValueError(f"[n={self.n}] server site {self.x} is not empty")
        lo, hi = self.inspected_interval()
        if len(self.queues) != hi - lo + 1:
            raise ValueError(f"[n={self.n}] inspected sites are not contiguous")
        if not (lo < self.x < hi):
            raise ValueError(f"[n={self.n}] a neighbour of {self.x} is uninspected")
        if any(c < 0 for c in self.queues.values()):
            raise ValueError(f"[n={self.n}] negative queue length")
        if self.n > 0 and self.t.log_value < math.log(self.n) - 1e-12:
            raise ValueError(f"[n={self.n}] elapsed time below n")


def init() -> ChainState:
    """Empty queues at -1, 0 and 1, server at the origin, time 0."""
    return ChainState(queues={-1: 0, 0: 0, 1: 0})


def next_direction(state: ChainState, tie_rng: np.random.Generator) -> int:
    """Move towards the longer neighbouring queue, breaking ties with a fair coin."""
    try:
        right = state.queues[state.x + 1]
        left = state.queues[state.x - 1]
    except KeyError as e:
        raise ValueError(f"neighbour {e.args[0]} of site {state.x} is uninspected") from e
    if right > left:
        return 1
    if left > right:
        return -1
    return 1 if tie_rng.integers(2) == 1 else -1
