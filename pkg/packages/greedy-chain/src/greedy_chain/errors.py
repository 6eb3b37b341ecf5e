from hitting_time.errors import BudgetExceeded, GreedyServerError

__all__ = ["BudgetExceeded", "GreedyServerError", "HorizonExceeded", "OutOfRange"]


class HorizonExceeded(GreedyServerError):
    """A Poisson mean left the range where queue counts stay exact integers."""

    def __init__(self, step: int, mean: float):
        self.step = step
        self.mean = mean
        super().__init__(
            f"exact horizon exceeded at step {step}: Poisson mean {mean:.6g}"
        )

    def __reduce__(self):
        return type(self), (self.step, self.mean)


class OutOfRange(GreedyServerError, ValueError):
    """A time query fell outside the simulated horizon."""

    def __init__(self, t_query: float, horizon: float):
        self.t_query = t_query
        self.horizon = horizon
        super().__init__(f"t={t_query!r} is beyond the simulated horizon T={horizon!r}")

    def __reduce__(self):
        return type(self), (self.t_query, self.horizon)
