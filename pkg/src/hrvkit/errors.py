"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class HrvkitError(Exception):
    pass


class ConfigError(HrvkitError):
    """Invalid or inconsistent configuration (bad flags, preset mismatch)."""


class DataError(HrvkitError):
    """Problems with input data: parse failures, missing files, bad values."""


class InsufficientDataError(DataError):
    """Input series too short for the requested operation."""


class SplitInfeasibleError(DataError):
    """Rejection sampling hit the attempt cap without an exact-count split."""

    def __init__(self, message, best_counts=None, attempts=None):
        super().__init__(message)
        self.best_counts = best_counts
        self.attempts = attempts
