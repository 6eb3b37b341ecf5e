"""Event-driven simulation of the greedy server in continuous time.

Customers arrive at every site of Z as independent Poisson(lam) processes.
The server empties the queue at its site at rate mu, then walks (unit travel
time) to whichever neighbour holds more customers, tossing a fair coin on
ties. Queues away from the server are only read when the server looks at
them, so their Poisson arrivals are drawn lazily for the time elapsed since
the last look. Service at the server's site is simulated customer by
customer.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from greedy_chain.streams import ORACLE, replica_streams

logger = logging.getLogger(__name__)

FIRST_CHUNK = 64
MAX_CHUNK = 1 << 20


class EventKind(str, Enum):
    ARRIVAL = "arrival"
    SERVICE_COMPLETION = "service_completion"
    # the service completion that empties a queue; the server leaves at once
    DEPARTURE = "departure"


@dataclass(frozen=True)
class Event:
    time: float
    kind: EventKind
    site: int
    # for departures, the site being left; ``site`` is the destination
    origin: Optional[int] = None


@dataclass
class EventLog:
    t_max: float
    lam: float
    mu: float
    seed: int
    events: List[Event] = field(default_factory=list)
    censored: bool = False

    def departures(self) -> List[Event]:
        return [e for e in self.events if e.kind is EventKind.DEPARTURE]

    def emptied_sites(self) -> List[int]:
        """X_1, X_2, ...: sites emptied after the initial empty queue at the origin."""
        return [e.origin for e in self.departures()[1:]]

    def emptying_times(self) -> List[float]:
        """T_1, T_2, ..."""
        return [e.time for e in self.departures()[1:]]

    def destinations(self) -> List[int]:
        """X_1, X_2, ...: every site the server has set off for."""
        return [e.site for e in self.departures()]

    def directions(self) -> List[int]:
        return [e.site - e.origin for e in self.departures()]

    def direction_changes(self) -> int:
        etas = self.directions()
        return sum(a != b for a, b in zip(etas, etas[1:]))

    def completed_moves(self) -> int:
        """Moves whose unit travel finished by t_max."""
        return sum(e.time + 1.0 <= self.t_max for e in self.departures())

    def check_invariants(self) -> None:
        """Raise ValueError on non-increasing timestamps or service away from the server."""
        times = [e.time for e in self.events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("event timestamps are not strictly increasing")
        position = 0
        for e in self.events:
            if e.kind is EventKind.DEPARTURE:
                if e.origin != position:
                    raise ValueError(f"departure from {e.origin} while the server is at {position}")
                position = e.site
            elif e.kind is EventKind.SERVICE_COMPLETION and e.site != position:
                raise ValueError(f"service at {e.site} while the server is at {position}")


class _Queues:
    """Counts read lazily: each site remembers when it was last looked at."""

    def __init__(self, lam: float, rng: np.random.Generator):
        self.lam = lam
        self.rng = rng
        self._seen: Dict[int, Tuple[int, float]] = {}

    def look(self, site: int, t: float) -> int:
        count, last = self._seen.get(site, (0, 0.0))
        if t > last:
            count += int(self.rng.poisson(self.lam * (t - last)))
        self._seen[site] = (count, t)
        return count

    def set(self, site: int, count: int, t: float) -> None:
        self._seen[site] = (count, t)


def _serve(
    q: int,
    t: float,
    site: int,
    log: EventLog,
    rng: np.random.Generator,
    record: bool,
) -> Tuple[int, float, bool]:
    """Run the birth-death queue at the server's site until it empties or t_max passes.

    Returns (queue length, time, emptied). The emptying completion itself is not
    logged here; it becomes the departure.
    """
    rate = log.lam + log.mu
    p_up = log.lam / rate
    chunk = FIRST_CHUNK
    while q > 0:
        times = t + np.cumsum(rng.exponential(1.0 / rate, chunk))
        up = rng.random(chunk) < p_up
        path = q + np.cumsum(np.where(up, 1, -1))
        hits = np.flatnonzero(path == 0)
        late = np.flatnonzero(times > log.t_max)
        first_hit = hits[0] if hits.size else chunk
        first_late = late[0] if late.size else chunk

        stop = min(first_hit, first_late)
        if record:
            for i in range(stop):
                kind = EventKind.ARRIVAL if up[i] else EventKind.SERVICE_COMPLETION
                log.events.append(Event(float(times[i]), kind, site))
        # an emptying that lands after t_max is censored like any later event
        if late.size and first_late <= first_hit:
            return (int(path[stop - 1]) if stop else q), log.t_max, False
        if hits.size:
            return 0, float(times[first_hit]), True
        q, t = int(path[-1]), float(times[-1])
        chunk = min(2 * chunk, MAX_CHUNK)
    return 0, t, True


def continuous_oracle(
    t_max: float,
    lam: float,
    mu: float,
    seed: int,
    *,
    replica: int = 0,
    max_departures: Optional[int] = None,
    record_customer_events: bool = False,
) -> EventLog:
    """Simulate the greedy server on [0, t_max].

    Departures are always logged; arrivals and service completions at the
    server's site only with record_customer_events. With max_departures the
    run stops right after the departure that follows that many emptyings.
    The log is marked censored when t_max cuts the run short.
    """
    if not (lam > 0 and mu > 0):
        raise ValueError(f"rates must be positive, got lam={lam}, mu={mu}")
    if not (0 < t_max < math.inf):
        raise ValueError(f"t_max must be positive and finite, got {t_max}")
    rng, tie_rng = replica_streams(seed, replica, family=ORACLE)
    log = EventLog(t_max=t_max, lam=lam, mu=mu, seed=seed)
    queues = _Queues(lam, rng)
    x, t, emptied = 0, 0.0, 0

    while True:
        queues.set(x, 0, t)
        right = queues.look(x + 1, t)
        left = queues.look(x - 1, t)
        if right != left:
            eta = 1 if right > left else -1
        else:
            eta = 1 if tie_rng.integers(2) == 1 else -1
        log.events.append(Event(t, EventKind.DEPARTURE, x + eta, origin=x))
        if max_departures is not None and emptied >= max_departures:
            break

        x, t = x + eta, t + 1.0
        if t > t_max:
            log.censored = True
            break
        q = queues.look(x, t)
        q, t, done = _serve(q, t, x, log, rng, record_customer_events)
        if not done:
            log.censored = True
            queues.set(x, q, t)
            break
        emptied += 1

    logger.debug(
        f"[oracle seed {seed} replica {replica}] {emptied} emptyings, censored={log.censored}"
    )
    return log
