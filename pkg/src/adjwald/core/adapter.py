"""Model-adapter contract consumed by the Wald machinery.

An adapter wraps a fitted parametric model and exposes the handful of
capabilities the location adjustment needs: the estimate, the expected
information as a function of the parameters, a first-order bias
function for the estimator, optional analytic derivative tensors of
the information, and simulate/refit hooks for bootstrap work.

Adapters must be immutable once fitted; all methods are read-only.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np

ML = "ML"
RB = "RB"


@dataclass
class FitResult:
    """Outcome of fitting a parametric model."""

    theta: np.ndarray
    estimator_kind: str
    loglik: float
    converged: bool
    iterations: int
    diverged: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.diverged is None:
            self.diverged = np.zeros(self.theta.size, dtype=bool)


class ModelAdapter(abc.ABC):
    """Capabilities a model must provide for location-adjusted Wald work."""

    @property
    @abc.abstractmethod
    def dim(self) -> int:
        """Number of parameters p."""

    @property
    @abc.abstractmethod
    def fit_result(self) -> FitResult:
        """The estimate the statistics are built on (ML or RB)."""

    @property
    def estimator_kind(self) -> str:
        return self.fit_result.estimator_kind

    @property
    def param_names(self):
        return [f"theta{j + 1}" for j in range(self.dim)]

    @abc.abstractmethod
    def info(self, theta) -> np.ndarray:
        """Expected information i(theta), p x p symmetric PSD."""

    @abc.abstractmethod
    def bias(self, theta) -> np.ndarray:
        """First-order bias of the ML estimator at theta (p-vector)."""

    def info_derivatives(self, theta):
        """Analytic tensors (d_i, d2_i) with shapes (p,p,p) and (p,p,p,p).

        ``d_i[u]`` is the derivative of the information with respect to
        theta_u and ``d2_i[u, v]`` the second derivative.  Return None
        when only the numeric path is available.
        """
        return None

    def diverged(self, j) -> bool:
        """Whether the estimate of component j is flagged as infinite."""
        return bool(self.fit_result.diverged[j])

    def simulate(self, theta, rng) -> np.ndarray:
        """Draw a response vector from the model at theta."""
        raise NotImplementedError(f"{type(self).__name__} cannot simulate")

    def refit(self, response) -> "ModelAdapter":
        """Refit on a new response with the same design and estimator kind."""
        raise NotImplementedError(f"{type(self).__name__} cannot refit")
