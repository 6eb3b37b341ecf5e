"""Renormalized recursion for the chain at large n.

Once queues are large, one step reduces to

    log tau_{n+1} = 2 log tau_n + log(lam S' / 2),   S' = 1 / Z'^2 standard Levy,

and the server turns before the following step exactly when Z sqrt(S') > 1
for a fresh standard normal Z. log tau is carried as gamma_hat = log tau_n / 2^n
so the state stays finite long after log tau itself leaves the double range.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from greedy_chain.state import ChainState, next_direction


@dataclass(frozen=True)
class AsymptoticState:
    n: int
    x: int
    eta: int
    # direction of the coming move, already fixed by the last turn decision
    next_eta: int
    gamma_hat: float
    log_gap: float

    @property
    def log_tau(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.ldexp(self.gamma_hat, self.n))

    @property
    def log_T(self) -> float:
        return self.log_tau + self.log_gap


def log_tau_from_gamma(gamma_hat, n: int):
    with np.errstate(over="ignore"):
        return np.ldexp(gamma_hat, n)


def asymptotic_kernel(
    n: int,
    gamma_hat,
    log_gap,
    levy,
    z,
    lam: float,
    z2=None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Advance (gamma_hat, log_gap) from step n to n + 1 and decide the next turn.

    Works elementwise on scalars or arrays. Returns the new gamma_hat, the new
    log_gap and a boolean turn indicator. With z2 given, the turn comparison
    keeps the (tau_n / tau_{n+1})^{1/2} Z'' term.
    """
    log_tau = log_tau_from_gamma(gamma_hat, n)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        incr = np.log(lam * levy / 2.0)
        raw = 2.0 * log_tau + incr
        clamped = raw < 0.0
        new_log_tau = np.maximum(raw, 0.0)
        new_gamma = np.where(clamped, 0.0, gamma_hat + np.ldexp(incr, -(n + 1)))
        # log T_n - log tau_{n+1}, written so huge log tau never cancels
        behind = np.where(
            clamped, log_tau + log_gap - new_log_tau, log_gap - log_tau - incr
        )
        new_log_gap = np.logaddexp(0.0, behind)
        if z2 is None:
            turn = z * np.sqrt(levy) > 1.0
        else:
            ratio = np.exp(-0.5 * (log_tau + incr))
            turn = math.sqrt(2.0) * z >= np.sqrt(2.0 / levy) + ratio * z2
    return new_gamma, new_log_gap, turn


def step_asymptotic(
    state: AsymptoticState,
    rng: np.random.Generator,
    *,
    lam: float,
    z2_correction: bool = False,
    fixed_levy: Optional[float] = None,
) -> AsymptoticState:
    """One renormalized step: move, grow log tau, and decide the direction after next."""
    zp = np.float64(rng.standard_normal())
    with np.errstate(divide="ignore"):
        levy = fixed_levy if fixed_levy is not None else float(1.0 / (zp * zp))
    z = rng.standard_normal()
    z2 = rng.standard_normal() if z2_correction else None

    new_gamma, new_log_gap, turn = asymptotic_kernel(
        state.n, state.gamma_hat, state.log_gap, levy, z, lam, z2
    )
    next_eta = -state.next_eta if bool(turn) else state.next_eta
    return AsymptoticState(
        n=state.n + 1,
        x=state.x + state.next_eta,
        eta=state.next_eta,
        next_eta=next_eta,
        gamma_hat=float(new_gamma),
        log_gap=float(new_log_gap),
    )


def handoff(state: ChainState, tie_rng: np.random.Generator) -> AsymptoticState:
    """Continue an exact configuration in the renormalized recursion."""
    if state.n < 1:
        raise ValueError("handoff needs at least one exact step")
    log_T = state.t.log_value
    return AsymptoticState(
        n=state.n,
        x=state.x,
        eta=state.eta,
        next_eta=next_direction(state, tie_rng),
        gamma_hat=math.ldexp(state.log_tau, -state.n),
        log_gap=log_T - state.log_tau,
    )
