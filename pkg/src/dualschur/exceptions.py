"""Exception types raised across the package."""


class DualSchurError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(DualSchurError, ValueError):
    pass


class NoConvergence(DualSchurError, RuntimeError):
    pass


class IndivisiblePartition(DualSchurError, ValueError):
    pass


class IllPosedForwardEuler(DualSchurError, ValueError):
    """d-type constraints cannot be combined with the explicit (gamma = 0) scheme."""


class GammaOutOfRange(DualSchurError, ValueError):
    pass


class AlphaOutOfRange(DualSchurError, ValueError):
    pass


class Diverged(DualSchurError, ArithmeticError):
    """A time-stepping run exceeded the blow-up guard.

    The offending state is kept on ``state`` so callers can report the
    truncated history.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
