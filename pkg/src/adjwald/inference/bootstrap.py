"""Parametric bootstrap for studentized intervals and scale adjustment.

Each replicate simulates a response from the fitted model, refits with
the same estimator kind, and recomputes the requested statistic with
the generating estimate as the null value.  Replicates draw from
independent substreams indexed by replicate number, so results do not
depend on execution order or parallelism degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.adapter import ML
from ..core.wald import statistic_curve
from ..errors import DomainError, RefitFailures, ZeroVariance
from ..numkit import RngStream
from .intervals import invert_statistic_grid

FAMILY_ADJUSTED = {
    "t": False,
    "t_star": True,
    "t_tilde": False,
    "t_tilde_star": True,
}

MAX_FAILURE_FRACTION = 0.05


@dataclass(frozen=True)
class BootstrapPlan:
    """Size, seed and target of a parametric bootstrap."""

    replicates: int
    seed: int
    statistic_family: str = "t_star"
    purpose: str = "quantiles"

    def __post_init__(self):
        if self.statistic_family not in FAMILY_ADJUSTED:
            raise DomainError(f"unknown statistic family {self.statistic_family!r}")
        if self.purpose not in ("quantiles", "variance"):
            raise DomainError("purpose must be 'quantiles' or 'variance'")
        minimum = 199 if self.purpose == "quantiles" else 50
        if self.replicates < minimum:
            raise DomainError(
                f"purpose {self.purpose!r} needs at least {minimum} replicates"
            )


def _check_family(adapter, family):
    rb_family = family.startswith("t_tilde")
    if rb_family and adapter.estimator_kind == ML:
        raise DomainError(f"{family} requires a reduced-bias adapter")
    if not rb_family and adapter.estimator_kind != ML:
        raise DomainError(f"{family} requires an ML adapter")
    return FAMILY_ADJUSTED[family]


def _one_replicate(adapter, j, psi_null, adjusted, derivative_path, seed, b):
    rng = RngStream(seed, b)
    response = adapter.simulate(adapter.fit_result.theta, rng)
    refitted = adapter.refit(response)
    if not refitted.fit_result.converged or refitted.diverged(j):
        return None
    curve = statistic_curve(refitted, j, adjusted=adjusted, derivative_path=derivative_path)
    value = curve.statistic(psi_null)
    return value if np.isfinite(value) else None


def replicate_statistics(
    adapter, j, plan: BootstrapPlan, derivative_path="auto", parallel=1
):
    """Bootstrap replicate statistics for parameter j.

    Returns (values, n_failed).  Replicates whose refit fails, diverges
    or produces a non-finite statistic are dropped and counted; more
    than 5% dropped raises ``RefitFailures``.
    """
    adjusted = _check_family(adapter, plan.statistic_family)
    psi_null = float(adapter.fit_result.theta[j])
    args = [(b,) for b in range(plan.replicates)]

    def task(b):
        try:
            return _one_replicate(
                adapter, j, psi_null, adjusted, derivative_path, plan.seed, b
            )
        except Exception:
            return None

    if parallel > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(task, range(plan.replicates)))
    else:
        results = [task(b) for b in range(plan.replicates)]
    values = np.array([r for r in results if r is not None])
    n_failed = plan.replicates - values.size
    if n_failed > MAX_FAILURE_FRACTION * plan.replicates:
        raise RefitFailures(
            f"{n_failed} of {plan.replicates} bootstrap refits failed",
            count=n_failed,
            total=plan.replicates,
        )
    return values, n_failed


def empirical_quantile(values, q):
    """Order-statistic quantile with k/(B+1) plotting positions (type 6)."""
    return float(np.quantile(np.asarray(values, dtype=float), q, method="weibull"))


def studentized_bootstrap_ci(
    adapter, j, level, plan: BootstrapPlan, derivative_path="auto", parallel=1
):
    """Invert the Wald curve between bootstrap quantiles of the statistic."""
    if plan.purpose != "quantiles":
        raise DomainError("studentized intervals need a plan with purpose='quantiles'")
    adjusted = _check_family(adapter, plan.statistic_family)
    values, n_failed = replicate_statistics(
        adapter, j, plan, derivative_path=derivative_path, parallel=parallel
    )
    alpha = 1.0 - level
    q_lo = empirical_quantile(values, alpha / 2.0)
    q_hi = empirical_quantile(values, 1.0 - alpha / 2.0)
    curve = statistic_curve(adapter, j, adjusted=adjusted, derivative_path=derivative_path)
    est = invert_statistic_grid(
        curve.statistic,
        curve.estimate,
        curve.se,
        level,
        quantiles=(q_lo, q_hi),
        method="studentized-bootstrap",
    )
    if n_failed:
        est.notes.append(f"{n_failed} replicates dropped")
    return est


def scale_adjusted_statistic(
    adapter, j, psi0, plan: BootstrapPlan, derivative_path="auto", parallel=1
):
    """Location- and scale-adjusted statistic t** (or its RB analogue).

    The location-adjusted statistic at psi0 is divided by the standard
    deviation of its bootstrap replicates.
    """
    if plan.purpose != "variance":
        raise DomainError("scale adjustment needs a plan with purpose='variance'")
    adjusted = _check_family(adapter, plan.statistic_family)
    if not adjusted:
        raise DomainError("scale adjustment applies to the adjusted families")
    values, n_failed = replicate_statistics(
        adapter, j, plan, derivative_path=derivative_path, parallel=parallel
    )
    sd = float(np.std(values, ddof=1))
    if sd < 1e-12:
        raise ZeroVariance("bootstrap standard deviation is numerically zero")
    curve = statistic_curve(adapter, j, adjusted=True, derivative_path=derivative_path)
    return curve.statistic(psi0) / sd
