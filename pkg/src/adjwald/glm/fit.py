"""GLM fitting: IRLS maximum likelihood and iterated bias-corrected scoring.

``fit_ml`` runs iteratively reweighted least squares, then estimates
any free dispersion both by maximum likelihood (profile score root)
and by the Pearson moment formula.  ``fit_rb`` iterates a Fisher
scoring step with the first-order bias subtracted at the current
iterate, whose fixed point solves the bias-adjusted score equation;
for binomial families the result stays finite under separation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, DidNotConverge, DomainError
from ..numkit import solve_spd, trigamma
from .families import Family, get_family

MAX_ITER = 100
SCORE_TOL = 1e-8
STEP_TOL = 1e-10
DIVERGENCE_CUTOFF = 10.0


@dataclass
class GlmSpec:
    """A GLM fitting problem: family, design, response and weights."""

    family: str
    X: np.ndarray
    y: np.ndarray
    m: np.ndarray | None = None
    dispersion_known: float | None = None
    offset: np.ndarray | None = None
    names: list | None = None

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float)
        n, k = self.X.shape
        if self.y.shape != (n,):
            raise DataError(f"response length {self.y.shape} does not match X ({n} rows)")
        self.m = (
            np.ones(n) if self.m is None else np.asarray(self.m, dtype=float)
        )
        if self.m.shape != (n,):
            raise DataError("weights must have one entry per observation")
        if np.any(self.m < 0):
            raise DomainError("observation weights must be non-negative")
        self.offset = (
            np.zeros(n) if self.offset is None else np.asarray(self.offset, dtype=float)
        )
        if n < k:
            raise DomainError(f"need at least as many observations ({n}) as columns ({k})")
        r = np.linalg.qr(self.X, mode="r")
        rank = int(np.sum(np.abs(np.diag(r)) > 1e-10 * max(1.0, np.abs(r).max())))
        if rank < k:
            raise DomainError("model matrix is rank deficient")
        fam = self.fam
        fam.check_response(self.y, self.m)
        if not fam.has_dispersion and self.dispersion_known is None:
            self.dispersion_known = 1.0
        if self.names is None:
            self.names = [f"beta{j + 1}" for j in range(k)]

    @property
    def fam(self) -> Family:
        return get_family(self.family)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def k(self):
        return self.X.shape[1]

    @property
    def dispersion_free(self):
        return self.fam.has_dispersion and self.dispersion_known is None

    def with_response(self, y):
        return GlmSpec(
            self.family, self.X, np.asarray(y, dtype=float), self.m.copy(),
            self.dispersion_known,
            self.offset.copy(), list(self.names),
        )


@dataclass
class GlmWorkspace:
    """Per-observation quantities at a coefficient vector."""

    eta: np.ndarray
    mu: np.ndarray
    d: np.ndarray        # d mu / d eta
    variance: np.ndarray
    w: np.ndarray        # m d^2 / V
    r: np.ndarray        # d log d / d eta
    l: np.ndarray        # d log V / d eta
    r1: np.ndarray       # second log-derivative of d
    l1: np.ndarray       # second log-derivative of V


def workspace(spec: GlmSpec, beta) -> GlmWorkspace:
    fam = spec.fam
    eta = spec.X @ np.asarray(beta, dtype=float) + spec.offset
    mu = fam.mu(eta)
    d = fam.d(eta)
    d2 = fam.d2(eta)
    d3 = fam.d3(eta)
    v = fam.variance(mu)
    v1 = fam.variance_d1(mu)
    v2 = fam.variance_d2(mu)
    w = spec.m * d * d / v
    r = d2 / d
    r1 = d3 / d - r * r
    l = v1 * d / v
    l1 = v2 * d * d / v - l * l + v1 * d2 / v
    return GlmWorkspace(eta, mu, d, v, w, r, l, r1, l1)


def score_beta(spec: GlmSpec, ws: GlmWorkspace, phi=1.0):
    """Score for the coefficients, (1/phi) X' diag(m d / V) (y - mu)."""
    resid = spec.m * (spec.y - ws.mu) * ws.d / ws.variance
    return spec.X.T @ resid / phi


def pearson_dispersion(spec: GlmSpec, mu) -> float:
    """Moment estimator based on Pearson residuals with n - k divisor."""
    v = spec.fam.variance(mu)
    return float(np.sum(spec.m * (spec.y - mu) ** 2 / v) / (spec.n - spec.k))


def _gamma_ml_dispersion(spec: GlmSpec, mu, phi_start) -> float:
    """Root of the gamma profile score in the shape parameter."""
    from ..numkit import digamma

    nu = 1.0 / max(phi_start, 1e-8)
    log_term = np.log(spec.y / mu) - spec.y / mu
    for _ in range(100):
        nui = spec.m * nu
        score = float(np.sum(spec.m * (np.log(nui) + 1.0 - digamma(nui)) + spec.m * log_term))
        hess = float(np.sum(spec.m**2 * (1.0 / nui - trigamma(nui))))
        if hess == 0.0:
            break
        step = score / hess
        new_nu = nu - step
        while new_nu <= 0:
            step *= 0.5
            new_nu = nu - step
        nu = new_nu
        if abs(step) <= 1e-12 * (1.0 + nu):
            break
    return 1.0 / nu


def ml_dispersion(spec: GlmSpec, mu, fallback) -> float:
    if spec.family == "gaussian-identity":
        return float(np.sum(spec.m * (spec.y - mu) ** 2) / spec.n)
    if spec.family == "gamma-log":
        return _gamma_ml_dispersion(spec, mu, fallback)
    raise DomainError(f"{spec.family} has no free dispersion")


@dataclass
class GlmFit:
    """A fitted GLM with both dispersion estimates and diagnostics."""

    spec: GlmSpec
    beta: np.ndarray
    estimator_kind: str
    loglik: float
    converged: bool
    iterations: int
    mu: np.ndarray
    phi_ml: float | None = None
    phi_pearson: float | None = None
    phi_rb: float | None = None
    diverged: np.ndarray | None = None
    separation: object = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.diverged is None:
            self.diverged = np.zeros(self.spec.k, dtype=bool)

    @property
    def phi_fixed(self):
        return self.spec.dispersion_known

    def dispersion(self, kind="pearson"):
        if self.phi_fixed is not None:
            return float(self.phi_fixed)
        value = {"ml": self.phi_ml, "pearson": self.phi_pearson, "rb": self.phi_rb}[kind]
        if value is None:
            raise DomainError(f"dispersion estimate {kind!r} unavailable")
        return float(value)


def _start_beta(spec: GlmSpec):
    fam = spec.fam
    mu0 = fam.initialize(spec.y, spec.m)
    eta0 = fam.link(mu0) - spec.offset
    d0 = fam.d(fam.link(mu0))
    v0 = fam.variance(mu0)
    w0 = spec.m * d0 * d0 / v0
    xw = spec.X * w0[:, None]
    try:
        return solve_spd(spec.X.T @ (spec.X * w0[:, None]), spec.X.T @ (w0 * eta0))
    except Exception:
        return np.zeros(spec.k)


def fit_ml(spec: GlmSpec, start=None, max_iter=MAX_ITER) -> GlmFit:
    """Maximum likelihood fit by iteratively reweighted least squares."""
    beta = np.asarray(start, dtype=float) if start is not None else _start_beta(spec)
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        ws = workspace(spec, beta)
        z = ws.eta - spec.offset + (spec.y - ws.mu) / ws.d
        xtw = spec.X.T * ws.w
        try:
            new_beta = solve_spd(xtw @ spec.X, xtw @ z)
        except Exception as exc:
            raise DidNotConverge(
                f"IRLS weights became degenerate at iteration {it}: {exc}",
                last_iterate=beta,
            ) from exc
        step = new_beta - beta
        beta = new_beta
        ws = workspace(spec, beta)
        score = score_beta(spec, ws)
        phi_ref = spec.dispersion_known or 1.0
        ll_ref = spec.fam.loglik(spec.y, ws.mu, phi_ref, spec.m)
        if (
            np.max(np.abs(score)) <= SCORE_TOL * (1.0 + abs(ll_ref))
            or np.linalg.norm(step) <= STEP_TOL
        ):
            converged = True
            break
    ws = workspace(spec, beta)
    phi_ml = phi_pearson = None
    if spec.dispersion_free:
        phi_pearson = pearson_dispersion(spec, ws.mu)
        phi_ml = ml_dispersion(spec, ws.mu, phi_pearson)
        loglik = spec.fam.loglik(spec.y, ws.mu, phi_ml, spec.m)
    else:
        loglik = spec.fam.loglik(spec.y, ws.mu, spec.dispersion_known or 1.0, spec.m)
    fit = GlmFit(
        spec=spec,
        beta=beta,
        estimator_kind="ML",
        loglik=loglik,
        converged=converged,
        iterations=iterations,
        mu=ws.mu,
        phi_ml=phi_ml,
        phi_pearson=phi_pearson,
    )
    _flag_divergence(fit)
    return fit


def _flag_divergence(fit: GlmFit):
    """Attach separation diagnostics for binomial fits that look divergent."""
    spec = fit.spec
    if not spec.family.startswith("binomial"):
        return
    if fit.converged and np.max(np.abs(fit.beta)) <= DIVERGENCE_CUTOFF:
        return
    from .separation import detect_separation

    status = detect_separation(spec)
    fit.separation = status
    if status.kind != "none":
        fit.diverged = status.divergent.copy()


def fit_rb(spec: GlmSpec, start=None, max_iter=2 * MAX_ITER, tol=1e-8) -> GlmFit:
    """Reduced-bias fit by iterated bias-corrected Fisher scoring.

    Each sweep moves to the usual scoring target and subtracts the
    first-order bias evaluated at the current iterate; the fixed point
    solves the adjusted score equation and has o(1/n) bias.
    """
    from .bias import coxsnell_bias
    from .info import expected_info

    beta = np.asarray(start, dtype=float) if start is not None else _start_beta(spec)
    free_phi = spec.dispersion_free
    if free_phi:
        ws = workspace(spec, beta)
        phi = max(pearson_dispersion(spec, ws.mu), 1e-6)
    else:
        phi = spec.dispersion_known or 1.0
    theta = np.concatenate([beta, [phi]]) if free_phi else beta.copy()
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        beta = theta[: spec.k]
        phi = theta[spec.k] if free_phi else (spec.dispersion_known or 1.0)
        ws = workspace(spec, beta)
        info = expected_info(spec, beta, phi)
        score = score_beta(spec, ws, phi)
        if free_phi:
            score = np.concatenate(
                [score, [spec.fam.dispersion_score(spec.y, ws.mu, phi, spec.m)]]
            )
        bias = coxsnell_bias(spec, beta, phi)
        step = solve_spd(info, score) - bias
        scale = 1.0
        for _ in range(30):
            candidate = theta + scale * step
            if not free_phi or candidate[spec.k] > 0:
                break
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
    beta = theta[: spec.k]
    phi = theta[spec.k] if free_phi else (spec.dispersion_known or 1.0)
    ws = workspace(spec, beta)
    return GlmFit(
        spec=spec,
        beta=beta,
        estimator_kind="RB",
        loglik=spec.fam.loglik(spec.y, ws.mu, phi, spec.m),
        converged=converged,
        iterations=iterations,
        mu=ws.mu,
        phi_ml=None,
        phi_pearson=pearson_dispersion(spec, ws.mu) if spec.fam.has_dispersion else None,
        phi_rb=phi if free_phi else None,
    )
