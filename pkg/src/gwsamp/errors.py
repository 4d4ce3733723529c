"""Exception types shared across the package."""


class GwsampError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(GwsampError):
    """A matrix required to be positive definite failed its Cholesky test."""


class NonConvergence(GwsampError):
    """An iterative routine hit its iteration cap before meeting tolerance."""


class StepOutOfCone(GwsampError):
    """A line search could not find a positive-definite iterate."""


class DegenerateTrace(GwsampError):
    """A sample trace is too degenerate to estimate a covariance from."""


class DegenerateChain(GwsampError):
    """A chain has zero variance, so autocorrelation is undefined."""


class AllRejected(GwsampError):
    """An MCMC run accepted nothing during burn-in; tuning is off."""


class SingularInput(GwsampError):
    """An input matrix is singular where an invertible one is required."""


class NonPositivePrice(GwsampError):
    """Price data contains a non-positive entry; returns are undefined."""


class ColumnCountMismatch(GwsampError):
    """A CSV row has a different number of fields than the header."""


class InsufficientRows(GwsampError):
    """Not enough data rows to perform the requested split."""
