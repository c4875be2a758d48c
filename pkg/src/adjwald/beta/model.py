"""Beta regression with logit mean link and log precision link.

The response is Beta(p_i, q_i) with p_i = mu_i phi_i and
q_i = (1 - mu_i) phi_i, where logit(mu_i) = x_i' beta and
log(phi_i) = z_i' gamma.  The sufficient statistics are
(log y, log(1 - y)), whose cumulants of any order are polygamma
functions, so the score, expected information and first-order bias all
have closed forms assembled from the per-observation chain-rule
derivatives of (p, q) in (beta, gamma).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BoundaryResponse, DataError, DomainError
from ..numkit import digamma, log_gamma, polygamma, solve_spd, trigamma


@dataclass
class BetaSpec:
    """Design for a variable-precision beta regression."""

    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray
    mean_names: list | None = None
    precision_names: list | None = None

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        self.y = np.asarray(self.y, dtype=float)
        n = self.X.shape[0]
        if self.Z.shape[0] != n or self.y.shape != (n,):
            raise DataError("X, Z and y must agree on the number of observations")
        if np.any(self.y <= 0.0) or np.any(self.y >= 1.0):
            raise BoundaryResponse("beta responses must lie strictly inside (0, 1)")
        for mat, label in ((self.X, "mean"), (self.Z, "precision")):
            r = np.linalg.qr(mat, mode="r")
            if np.sum(np.abs(np.diag(r)) > 1e-10 * max(1.0, np.abs(r).max())) < mat.shape[1]:
                raise DomainError(f"{label} model matrix is rank deficient")
        if self.mean_names is None:
            self.mean_names = [f"beta{j + 1}" for j in range(self.k1)]
        if self.precision_names is None:
            self.precision_names = [f"gamma{j + 1}" for j in range(self.k2)]

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def k1(self):
        return self.X.shape[1]

    @property
    def k2(self):
        return self.Z.shape[1]

    @property
    def dim(self):
        return self.k1 + self.k2

    @property
    def names(self):
        return list(self.mean_names) + list(self.precision_names)

    def with_response(self, y):
        return BetaSpec(
            self.X, self.Z, np.asarray(y, dtype=float),
            list(self.mean_names), list(self.precision_names),
        )


@dataclass
class BetaWorkspace:
    """Per-observation quantities at a parameter vector."""

    mu: np.ndarray
    phi: np.ndarray
    p: np.ndarray
    q: np.ndarray
    d: np.ndarray          # d mu / d eta for the logit link
    jac: np.ndarray        # (n, 2, dim) derivatives of (p, q)
    c2: np.ndarray         # (n, 2, 2) second cumulants of (log y, log(1-y))
    mean_s1: np.ndarray | None    # E log y (None when means were skipped)
    mean_s2: np.ndarray | None    # E log(1 - y)

    @property
    def valid(self):
        return bool(
            np.all(np.isfinite(self.p))
            and np.all(self.p > 0)
            and np.all(np.isfinite(self.q))
            and np.all(self.q > 0)
        )


def split_params(spec: BetaSpec, theta):
    theta = np.asarray(theta, dtype=float)
    return theta[: spec.k1], theta[spec.k1 :]


def beta_workspace(spec: BetaSpec, theta, means=True) -> BetaWorkspace:
    beta, gamma = split_params(spec, theta)
    eta = spec.X @ beta
    zeta = spec.Z @ gamma
    with np.errstate(over="ignore"):
        # keep the mean strictly interior so wild iterates stay evaluable
        mu = np.clip(1.0 / (1.0 + np.exp(-eta)), 1e-12, 1.0 - 1e-12)
        phi = np.exp(zeta)
    p = mu * phi
    q = (1.0 - mu) * phi
    d = mu * (1.0 - mu)
    n = spec.n
    jac = np.zeros((n, 2, spec.dim))
    jac[:, 0, : spec.k1] = (phi * d)[:, None] * spec.X
    jac[:, 1, : spec.k1] = -(phi * d)[:, None] * spec.X
    jac[:, 0, spec.k1 :] = p[:, None] * spec.Z
    jac[:, 1, spec.k1 :] = q[:, None] * spec.Z
    tiny = np.finfo(float).tiny
    stacked = trigamma(np.maximum(np.concatenate([p, q, p + q]), tiny))
    tg_p, tg_q, tg_pq = stacked[:n], stacked[n : 2 * n], stacked[2 * n :]
    c2 = np.empty((n, 2, 2))
    with np.errstate(invalid="ignore"):
        c2[:, 0, 0] = tg_p - tg_pq
        c2[:, 1, 1] = tg_q - tg_pq
    c2[:, 0, 1] = c2[:, 1, 0] = -tg_pq
    mean_s1 = mean_s2 = None
    if means:
        with np.errstate(invalid="ignore"):
            dg = digamma(np.maximum(np.concatenate([p, q, p + q]), tiny))
            mean_s1 = dg[:n] - dg[2 * n :]
            mean_s2 = dg[n : 2 * n] - dg[2 * n :]
    return BetaWorkspace(mu, phi, p, q, d, jac, c2, mean_s1, mean_s2)


def beta_loglik(spec: BetaSpec, theta, ws: BetaWorkspace | None = None) -> float:
    ws = ws if ws is not None else beta_workspace(spec, theta)
    return float(
        np.sum(
            log_gamma(ws.p + ws.q)
            - log_gamma(ws.p)
            - log_gamma(ws.q)
            + (ws.p - 1.0) * np.log(spec.y)
            + (ws.q - 1.0) * np.log(1.0 - spec.y)
        )
    )


def beta_score(spec: BetaSpec, theta, ws: BetaWorkspace | None = None) -> np.ndarray:
    ws = ws or beta_workspace(spec, theta)
    resid = np.stack(
        [np.log(spec.y) - ws.mean_s1, np.log(1.0 - spec.y) - ws.mean_s2], axis=1
    )
    return np.einsum("ns,nsp->p", resid, ws.jac)


def beta_expected_info(spec: BetaSpec, theta, ws: BetaWorkspace | None = None):
    """Expected information, sum_i J_i' C2_i J_i; SPD at interior points."""
    ws = ws if ws is not None else beta_workspace(spec, theta, means=False)
    info = np.einsum("nsp,nst,ntq->pq", ws.jac, ws.c2, ws.jac)
    return 0.5 * (info + info.T)


def _second_derivative_maps(spec: BetaSpec, ws: BetaWorkspace):
    """(n, dim, dim) second derivatives of p and of q in (beta, gamma)."""
    n = spec.n
    dim = spec.dim
    k1 = spec.k1
    dprime = ws.d * (1.0 - 2.0 * ws.mu)
    p2 = np.zeros((n, dim, dim))
    q2 = np.zeros((n, dim, dim))
    xx = np.einsum("na,nb->nab", spec.X, spec.X)
    xz = np.einsum("na,nb->nab", spec.X, spec.Z)
    zz = np.einsum("na,nb->nab", spec.Z, spec.Z)
    p2[:, :k1, :k1] = (ws.phi * dprime)[:, None, None] * xx
    q2[:, :k1, :k1] = -(ws.phi * dprime)[:, None, None] * xx
    cross_p = (ws.phi * ws.d)[:, None, None] * xz
    p2[:, :k1, k1:] = cross_p
    p2[:, k1:, :k1] = np.transpose(cross_p, (0, 2, 1))
    q2[:, :k1, k1:] = -cross_p
    q2[:, k1:, :k1] = -np.transpose(cross_p, (0, 2, 1))
    p2[:, k1:, k1:] = ws.p[:, None, None] * zz
    q2[:, k1:, k1:] = ws.q[:, None, None] * zz
    return p2, q2


def coxsnell_bias_beta(spec: BetaSpec, theta) -> np.ndarray:
    """First-order bias of the ML estimator from the cumulant contraction.

    b = i^{-1} A with
    A_a = sum_{b,c} [i^{-1}]_{bc} (kappa_{abc} / 2 + kappa_{ab,c});
    after contraction the surviving terms involve the traces of
    i^{-1} against the second-derivative maps of (p, q) and against the
    third-cumulant quadratic forms of the jacobian.
    """
    ws = beta_workspace(spec, theta, means=False)
    info = beta_expected_info(spec, theta, ws)
    minv = solve_spd(info, np.eye(spec.dim))
    p2, q2 = _second_derivative_maps(spec, ws)
    g3_p = polygamma(2, ws.p)
    g3_q = polygamma(2, ws.q)
    g3_pq = polygamma(2, ws.p + ws.q)
    n = spec.n
    c3_1 = np.empty((n, 2, 2))  # third cumulants with first index on log y
    c3_1[:, 0, 0] = g3_p - g3_pq
    c3_1[:, 0, 1] = c3_1[:, 1, 0] = -g3_pq
    c3_1[:, 1, 1] = -g3_pq
    c3_2 = np.empty((n, 2, 2))  # first index on log(1 - y)
    c3_2[:, 0, 0] = -g3_pq
    c3_2[:, 0, 1] = c3_2[:, 1, 0] = -g3_pq
    c3_2[:, 1, 1] = g3_q - g3_pq
    g = np.einsum("nst,ntp->nsp", ws.c2, ws.jac)  # C2 J per observation
    tr_p2 = np.einsum("pq,npq->n", minv, p2)
    tr_q2 = np.einsum("pq,npq->n", minv, q2)
    w3_1 = np.einsum("nsp,nst,ntq->npq", ws.jac, c3_1, ws.jac)
    w3_2 = np.einsum("nsp,nst,ntq->npq", ws.jac, c3_2, ws.jac)
    tr_w1 = np.einsum("pq,npq->n", minv, w3_1)
    tr_w2 = np.einsum("pq,npq->n", minv, w3_2)
    a_vec = -0.5 * (
        np.einsum("n,np->p", tr_p2, g[:, 0, :])
        + np.einsum("n,np->p", tr_q2, g[:, 1, :])
        + np.einsum("n,np->p", tr_w1, ws.jac[:, 0, :])
        + np.einsum("n,np->p", tr_w2, ws.jac[:, 1, :])
    )
    return minv @ a_vec
