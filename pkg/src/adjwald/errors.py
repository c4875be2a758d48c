"""Exception types shared across the package."""


class AdjwaldError(Exception):
    """Base class for all package-specific errors."""


class DomainError(AdjwaldError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NotPositiveDefinite(AdjwaldError):
    """A matrix required to be symmetric positive definite is not.

    Raised by the Cholesky-based solver after the one-shot jitter retry
    fails; usually signals a singular or ill-conditioned information
    matrix (e.g. near data separation).
    """


class NonFiniteEvaluation(AdjwaldError):
    """A numerical-differentiation probe returned a non-finite value."""


class InfiniteEstimate(AdjwaldError):
    """An estimate required to be finite diverged."""


class DidNotConverge(AdjwaldError):
    """An iterative fit exhausted its iteration budget.

    Carries the last iterate and diagnostics so callers can inspect
    how far the algorithm got.
    """

    def __init__(self, message, last_iterate=None, diagnostics=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.diagnostics = diagnostics or {}


class BoundaryResponse(AdjwaldError, ValueError):
    """A response value sits on the boundary of its admissible range."""


class GridTooNarrow(AdjwaldError):
    """A confidence-interval inversion grid does not bracket a crossing."""


class MultipleCrossings(AdjwaldError):
    """More than two sign changes were found when inverting a statistic."""

    def __init__(self, message, crossings=None):
        super().__init__(message)
        self.crossings = crossings or []


class RefitFailures(AdjwaldError):
    """Too many bootstrap replicates failed to refit."""

    def __init__(self, message, count=0, total=0):
        super().__init__(message)
        self.count = count
        self.total = total


class ZeroVariance(AdjwaldError):
    """A bootstrap variance estimate is numerically zero."""


class ConstrainedFitFailed(AdjwaldError):
    """The constrained (null) fit required by a likelihood-ratio root failed."""


class NegativeDeviance(AdjwaldError):
    """The log-likelihood-ratio came out negative beyond rounding error.

    Signals that the unconstrained optimiser stopped short of the
    maximum, so the signed root is undefined.
    """


class LpCycleLimit(AdjwaldError):
    """The separation-detection linear program failed to terminate."""


class ConfigError(AdjwaldError):
    """A run configuration is malformed or inconsistent."""


class DataError(AdjwaldError):
    """An input data file is malformed.

    ``row`` is the 1-based data row (excluding the header) when known.
    """

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row
