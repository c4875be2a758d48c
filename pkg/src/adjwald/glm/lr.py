"""Signed root of the log likelihood-ratio statistic for one coefficient.

The constrained fit pins beta_j at the null value through an offset and
refits the remaining coefficients (and any free dispersion, by its
profile ML estimate).  Tiny negative deviances from convergence noise
are clamped to zero; anything beyond that is reported as a negative
logarithm failure rather than silently truncated.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConstrainedFitFailed, NegativeDeviance
from .fit import GlmSpec, fit_ml

_CLAMP = 1e-10


def signed_lr_root(spec: GlmSpec, j: int, psi0: float = 0.0, full_fit=None) -> float:
    """sign(betahat_j - psi0) * sqrt(2 {l(thetahat) - l(thetahat_0)})."""
    fit = full_fit if full_fit is not None else fit_ml(spec)
    keep = [c for c in range(spec.k) if c != j]
    if not keep:
        raise ConstrainedFitFailed("cannot constrain the only coefficient away")
    reduced = GlmSpec(
        spec.family,
        spec.X[:, keep],
        spec.y,
        spec.m.copy(),
        spec.dispersion_known,
        spec.offset + psi0 * spec.X[:, j],
        [spec.names[c] for c in keep],
    )
    try:
        null_fit = fit_ml(reduced)
    except Exception as exc:
        raise ConstrainedFitFailed(f"constrained fit failed: {exc}") from exc
    if not null_fit.converged:
        raise ConstrainedFitFailed("constrained fit did not converge")
    deviance = 2.0 * (fit.loglik - null_fit.loglik)
    if deviance < -_CLAMP:
        raise NegativeDeviance(
            f"log likelihood ratio is negative ({deviance:.3e}); "
            "the unconstrained fit is not at its maximum"
        )
    deviance = max(deviance, 0.0)
    return float(np.sign(fit.beta[j] - psi0) * np.sqrt(deviance))
