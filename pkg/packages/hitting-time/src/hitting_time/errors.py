class GreedyServerError(RuntimeError):
    """Base class for failures raised by the greedy-server laboratory."""


class BudgetExceeded(GreedyServerError):
    """An exact emptying-time walk ran past its step budget."""

    def __init__(self, steps_taken: int, partial_time: float):
        self.steps_taken = steps_taken
        self.partial_time = partial_time
        super().__init__(
            f"walk exceeded its step budget after {steps_taken} steps "
            f"(elapsed time {partial_time:.6g})"
        )

    def __reduce__(self):
        return type(self), (self.steps_taken, self.partial_time)
