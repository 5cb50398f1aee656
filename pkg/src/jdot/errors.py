"""Exception types shared across the package."""


class JdotError(Exception):
    """Base class for package errors."""


class DataError(JdotError, ValueError):
    """Invalid or malformed input data (bad shapes, non-finite values, CSV problems)."""


class SolverError(JdotError, RuntimeError):
    """A numerical solver failed beyond recovery."""

    def __init__(self, message: str, condition_estimate: float | None = None):
        if condition_estimate is not None:
            message = f"{message} (condition estimate {condition_estimate:.3e})"
        super().__init__(message)
        self.condition_estimate = condition_estimate
