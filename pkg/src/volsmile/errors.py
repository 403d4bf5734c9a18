"""Exception and warning types shared across the package."""


class VolSmileError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(VolSmileError, ValueError):
    """An argument lies outside the domain of the operation."""


class CalibrationError(VolSmileError, ValueError):
    """Distribution parameters cannot be solved to match the forward."""


class ConvergenceError(VolSmileError, ArithmeticError):
    """An iterative or adaptive routine failed to reach its tolerance."""

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class NoSolutionError(VolSmileError, ValueError):
    """An option price lies at or outside its no-arbitrage bounds.

    ``bound`` is one of ``"below_lower_bound"`` or ``"above_upper_bound"``.
    """

    def __init__(self, message, bound):
        super().__init__(message)
        self.bound = bound


class ParityViolationError(VolSmileError, ValueError):
    """Put-call parity produced a negative option price."""


class ArbitrageBoundError(VolSmileError, ValueError):
    """A computed price falls outside its static no-arbitrage bounds."""


class EmptyCurveError(VolSmileError, ValueError):
    """Every strike on the grid failed implied-volatility inversion."""

    def __init__(self, message, skipped=()):
        super().__init__(message)
        self.skipped = list(skipped)


class ForwardMismatchWarning(UserWarning):
    """The distribution mean differs from the no-arbitrage forward."""

    def __init__(self, message, mean=None, forward=None):
        super().__init__(message)
        self.mean = mean
        self.forward = forward
