"""Fisher-scoring fits for beta regression: ML and reduced-bias."""

from __future__ import annotations

import numpy as np

from ..core.adapter import ML, RB, FitResult
from ..errors import DidNotConverge
from ..numkit import solve_spd
from .model import (
    BetaSpec,
    beta_expected_info,
    beta_loglik,
    beta_score,
    beta_workspace,
    coxsnell_bias_beta,
)

MAX_ITER = 100
SCORE_TOL = 1e-8
STEP_TOL = 1e-10


def _start_values(spec: BetaSpec) -> np.ndarray:
    """Quasi-linearised least-squares initialisation.

    Regress logit(y) on X for the mean coefficients; back out a common
    precision from the residual variance by the delta method.
    """
    logit_y = np.log(spec.y / (1.0 - spec.y))
    beta0, *_ = np.linalg.lstsq(spec.X, logit_y, rcond=None)
    resid = logit_y - spec.X @ beta0
    df = max(spec.n - spec.k1, 1)
    sigma2 = float(resid @ resid) / df
    mu0 = 1.0 / (1.0 + np.exp(-(spec.X @ beta0)))
    phi_implied = 1.0 / (sigma2 * mu0 * (1.0 - mu0)) - 1.0
    phi_bar = max(float(np.mean(phi_implied)), 0.5)
    gamma0 = np.zeros(spec.k2)
    # place the common log-precision on the intercept-like column
    col_norms = np.linalg.norm(spec.Z, axis=0)
    anchor = int(np.argmax(np.all(spec.Z == spec.Z[0], axis=0) * (col_norms > 0)))
    gamma0[anchor] = np.log(phi_bar) / spec.Z[0, anchor] if spec.Z[0, anchor] else 0.0
    return np.concatenate([beta0, gamma0])


def fit_beta_ml(spec: BetaSpec, start=None, max_iter=MAX_ITER) -> FitResult:
    """Maximum likelihood by Fisher scoring with step halving."""
    theta = np.asarray(start, dtype=float) if start is not None else _start_values(spec)
    ws = beta_workspace(spec, theta)
    loglik = beta_loglik(spec, theta, ws)
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        score = beta_score(spec, theta, ws)
        if np.max(np.abs(score)) <= SCORE_TOL * (1.0 + abs(loglik)):
            converged = True
            break
        info = beta_expected_info(spec, theta, ws)
        step = solve_spd(info, score)
        scale = 1.0
        for _ in range(40):
            new_theta = theta + scale * step
            new_ws = beta_workspace(spec, new_theta)
            if new_ws.valid:
                new_ll = beta_loglik(spec, new_theta, new_ws)
                if np.isfinite(new_ll) and new_ll >= loglik - 1e-10:
                    break
            scale *= 0.5
        else:
            raise DidNotConverge(
                "Fisher scoring step could not improve the likelihood",
                last_iterate=theta,
            )
        theta, ws, loglik = new_theta, new_ws, new_ll
        if np.linalg.norm(scale * step) <= STEP_TOL:
            converged = True
            break
    if not converged:
        raise DidNotConverge(
            f"Fisher scoring did not converge in {max_iter} iterations",
            last_iterate=theta,
            diagnostics={"score_norm": float(np.max(np.abs(beta_score(spec, theta))))},
        )
    return FitResult(theta, ML, loglik, converged, iterations)


def fit_beta_rb(spec: BetaSpec, start=None, max_iter=2 * MAX_ITER, tol=1e-8) -> FitResult:
    """Reduced-bias estimate by iterated bias-corrected Fisher scoring."""
    if start is None:
        try:
            start = fit_beta_ml(spec).theta
        except DidNotConverge:
            start = _start_values(spec)
    theta = np.asarray(start, dtype=float)
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        ws = beta_workspace(spec, theta)
        score = beta_score(spec, theta, ws)
        info = beta_expected_info(spec, theta, ws)
        step = solve_spd(info, score) - coxsnell_bias_beta(spec, theta)
        scale = 1.0
        while scale > 1e-8 and not beta_workspace(spec, theta + scale * step).valid:
            scale *= 0.5
        theta = theta + scale * step
        if np.linalg.norm(scale * step) <= tol:
            converged = True
            break
    if not converged:
        raise DidNotConverge(
            f"bias-corrected scoring did not converge in {max_iter} sweeps",
            last_iterate=theta,
        )
    return FitResult(theta, RB, beta_loglik(spec, theta), converged, iterations)
