"""Exception hierarchy shared by every authcap module."""


class AuthcapError(Exception):
    """Base class for all errors raised by the engine."""

    exit_code = 1


class ValidationError(AuthcapError, ValueError):
    """Malformed distributions, rates, code sizes or configuration."""

    exit_code = 2


class DimensionError(ValidationError):
    """Alphabet sizes that do not line up, even after an explicit lift."""


class BudgetExceededError(AuthcapError):
    """An exhaustive enumeration would exceed its configured cap."""

    exit_code = 3

    def __init__(self, what: str, size: int, budget: int):
        super().__init__(f"{what}: {size} exceeds budget {budget}")
        self.what = what
        self.size = size
        self.budget = budget


class NonConvergenceError(AuthcapError):
    """A solver stopped before reaching its tolerance and the caller asked for strict results."""

    exit_code = 4
