"""Exception hierarchy for poolgame."""


class PoolGameError(Exception):
    """Base class for every error raised by this package."""


class DegenerateStateError(PoolGameError, ValueError):
    """The population state carries no hash rate at all."""


class EmptyPoolError(PoolGameError, ValueError):
    """A per-miner quantity was requested for a pool nobody belongs to."""


class UnsupportedShapeError(PoolGameError, ValueError):
    """An operation that only exists for a fixed number of pools got another."""


class DegenerateStrategiesError(PoolGameError, ValueError):
    """Two pools ask for the same hash rate, so a closed form divides by zero."""


class NotARestPointError(PoolGameError, ValueError):
    """Classification was requested for a state with non-vanishing dynamics."""


class NumericalFailure(PoolGameError, ArithmeticError):
    """Integration produced NaN or overflow.

    Attributes
    ----------
    time : float
        ODE time at which the non-finite value first appeared.
    """

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"non-finite state at t={self.time:g}")


class ConfigError(PoolGameError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
