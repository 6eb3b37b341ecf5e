"""Named random streams derived from one base seed.

Every stream is a child of ``SeedSequence(seed)`` addressed by a spawn key
(family, replica, stream), so replicas can be run in any order, on any worker,
and still draw the same numbers.
"""

from typing import Tuple

import numpy as np

# families
PREFIX = 0
CONTINUATION = 1
ORACLE = 2
REFERENCE = 3
SAMPLING = 4

# streams within a replica
MAIN = 0
TIES = 1


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def replica_streams(
    seed: int, replica: int, family: int = PREFIX
) -> Tuple[np.random.Generator, np.random.Generator]:
    """Main and tie-break generators of one replica."""
    return stream(seed, family, replica, MAIN), stream(seed, family, replica, TIES)


def continuation_stream(seed: int, replica: int) -> np.random.Generator:
    """Generator of one replica's renormalized steps, shared by run() and ChainEnsemble."""
    return stream(seed, CONTINUATION, replica)
