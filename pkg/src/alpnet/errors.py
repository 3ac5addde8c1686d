"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent caller input."""


class PreconditionError(ValueError):
    """A documented operation precondition does not hold."""


class IterationBudgetError(RuntimeError):
    """An iterative solver exhausted its iteration budget.

    Carries the last iterate so callers can inspect or resume from it.
    """

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class DegenerateBeamError(RuntimeError):
    """Effective signal gain collapsed below the usable threshold."""
