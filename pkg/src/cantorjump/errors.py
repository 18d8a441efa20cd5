"""Exception types shared across the package."""


class LevelCapError(ValueError):
    """A requested resolution exceeds the configured dense-matrix cap."""


class RejectionBudgetError(RuntimeError):
    """Rejection sampling exhausted its attempt budget.

    Carries the analytic acceptance probability so callers can tell whether
    the budget was simply too small for the requested confinement.
    """

    def __init__(self, message: str, acceptance_probability: float, attempts: int):
        super().__init__(message)
        self.acceptance_probability = acceptance_probability
        self.attempts = attempts
