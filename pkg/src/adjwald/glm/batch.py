"""Vectorised GLM bootstrap: many replicate fits and t* values at once.

The inner loop of the bootstrap scale adjustment refits the same small
design hundreds of times.  This module runs IRLS and the
location-adjusted statistic simultaneously across replicates with
batched linear algebra; it must produce the same numbers as the
one-at-a-time path (asserted in the test suite) and exists purely to
make double-bootstrap studies tractable.

Only the ML estimator with the ML dispersion plug-in is supported,
which is what the scale-adjusted statistic uses.
"""

from __future__ import annotations

import numpy as np

from ..numkit import RngStream, digamma, trigamma
from .fit import GlmSpec, workspace

_MAX_ITER = 100
_STEP_TOL = 1e-10
_SCORE_TOL = 1e-8


def _batched_workspace(spec: GlmSpec, eta):
    fam = spec.fam
    mu = fam.mu(eta)
    d = fam.d(eta)
    v = fam.variance(mu)
    w = spec.m * d * d / v
    return mu, d, v, w


def batched_irls(spec: GlmSpec, y_batch, start):
    """IRLS across replicates; returns (beta (B,k), converged (B,))."""
    b_count, n = y_batch.shape
    k = spec.k
    beta = np.tile(np.asarray(start, dtype=float), (b_count, 1))
    active = np.ones(b_count, dtype=bool)
    converged = np.zeros(b_count, dtype=bool)
    x = spec.X
    for _ in range(_MAX_ITER):
        if not active.any():
            break
        eta = beta @ x.T + spec.offset
        mu, d, v, w = _batched_workspace(spec, eta)
        z = eta - spec.offset + (y_batch - mu) / d
        xtw = np.einsum("bn,np,nq->bpq", w, x, x)
        xtwz = np.einsum("bn,np,bn->bp", w, x, z)
        try:
            new_beta = np.linalg.solve(xtw, xtwz[..., None])[..., 0]
        except np.linalg.LinAlgError:
            jitter = 1e-10 * np.trace(xtw, axis1=1, axis2=2)[:, None, None] / k
            new_beta = np.linalg.solve(xtw + jitter * np.eye(k), xtwz[..., None])[..., 0]
        step = np.linalg.norm(new_beta - beta, axis=1)
        beta = np.where(active[:, None], new_beta, beta)
        eta = beta @ x.T + spec.offset
        mu, d, v, w = _batched_workspace(spec, eta)
        score = np.einsum("np,bn->bp", x, spec.m * (y_batch - mu) * d / v)
        small_score = np.max(np.abs(score), axis=1) <= _SCORE_TOL * 100.0
        done = (step <= _STEP_TOL) | small_score
        converged |= active & done
        active &= ~done
    return beta, converged


def _batched_gamma_ml_phi(spec: GlmSpec, y_batch, mu):
    """Newton root of the gamma profile dispersion score, per replicate."""
    resid = np.sum(
        spec.m * (y_batch - mu) ** 2 / spec.fam.variance(mu), axis=1
    ) / max(spec.n - spec.k, 1)
    nu = 1.0 / np.maximum(resid, 1e-8)
    log_term = np.sum(spec.m * (np.log(y_batch / mu) - y_batch / mu), axis=1)
    m_sum = float(np.sum(spec.m))
    for _ in range(60):
        nui = spec.m[None, :] * nu[:, None]
        score = (
            np.sum(spec.m[None, :] * (np.log(nui) + 1.0 - digamma(nui)), axis=1)
            + log_term
        )
        hess = np.sum(spec.m[None, :] ** 2 * (1.0 / nui - trigamma(nui)), axis=1)
        step = score / hess
        new_nu = nu - step
        bad = new_nu <= 0
        while bad.any():
            step = np.where(bad, 0.5 * step, step)
            new_nu = nu - step
            bad = new_nu <= 0
        nu = new_nu
        if np.max(np.abs(step) / (1.0 + nu)) <= 1e-12:
            break
    return 1.0 / nu


def batched_tstar(spec: GlmSpec, beta, phi, j, psi0):
    """Location-adjusted statistics across replicates at (beta, phi).

    ``beta`` is (B, k), ``phi`` (B,) (ignored for fixed-dispersion
    families), ``j`` indexes the coefficients.  Returns (t, t_star).
    """
    x = spec.X
    b_count, k = beta.shape
    free = spec.dispersion_free
    p = k + 1 if free else k
    eta = beta @ x.T + spec.offset
    fam = spec.fam
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
    phi_val = phi if free else np.full(b_count, spec.dispersion_known or 1.0)

    xtwx = np.einsum("bn,np,nq->bpq", w, x, x)
    info = np.zeros((b_count, p, p))
    info[:, :k, :k] = xtwx / phi_val[:, None, None]
    if free:
        u = -spec.m[None, :] / phi_val[:, None]
        a2 = fam.a2(u)
        a3 = fam.a3(u)
        a4 = fam.a4(u)
        m2a2 = np.sum(spec.m**2 * a2, axis=1)
        m3a3 = np.sum(spec.m**3 * a3, axis=1)
        m4a4 = np.sum(spec.m**4 * a4, axis=1)
        info[:, k, k] = m2a2 / (2.0 * phi_val**4)
    minv = np.linalg.inv(info)
    minv = 0.5 * (minv + np.transpose(minv, (0, 2, 1)))
    kap = np.sqrt(minv[:, j, j])
    est = beta[:, j]
    t = (est - psi0) / kap

    # derivative tensors restricted to the mj = M[:, j] contractions
    c1 = w * (2.0 * r - l)
    c2 = w * ((2.0 * r - l) ** 2 + (2.0 * r1 - l1))
    t1 = np.einsum("rn,na,nb,nc->rabc", c1, x, x, x)
    t2 = np.einsum("rn,na,nb,nc,nd->rabcd", c2, x, x, x, x)
    d_i = np.zeros((b_count, p, p, p))
    d_i[:, :k, :k, :k] = t1 / phi_val[:, None, None, None]
    d2_i = np.zeros((b_count, p, p, p, p))
    d2_i[:, :k, :k, :k, :k] = t2 / phi_val[:, None, None, None, None]
    if free:
        d_i[:, k, :k, :k] = -xtwx / phi_val[:, None, None] ** 2
        d_i[:, k, k, k] = m3a3 / (2.0 * phi_val**6) - 2.0 * m2a2 / phi_val**5
        d2_i[:, :k, k, :k, :k] = -t1 / phi_val[:, None, None, None] ** 2
        d2_i[:, k, :k, :k, :k] = -t1 / phi_val[:, None, None, None] ** 2
        d2_i[:, k, k, :k, :k] = 2.0 * xtwx / phi_val[:, None, None] ** 3
        d2_i[:, k, k, k, k] = (
            10.0 * m2a2 / phi_val**6
            - 5.0 * m3a3 / phi_val**7
            + m4a4 / (2.0 * phi_val**8)
        )
    mj = minv[:, :, j]
    g = np.einsum("rupq,rp,rq->ru", d_i, mj, mj)
    c = np.einsum("rupq,rq->rup", d_i, mj)
    s = np.einsum("rup,rpq,rvq->ruv", c, minv, c)
    k2 = np.einsum("ruvpq,rp,rq->ruv", d2_i, mj, mj)
    grad_k = -g / (2.0 * kap[:, None])
    hess_k = (
        -np.einsum("ru,rv->ruv", g, g) / (4.0 * kap[:, None, None] ** 3)
        + s / kap[:, None, None]
        - k2 / (2.0 * kap[:, None, None])
    )
    e = np.zeros((b_count, p))
    e[:, j] = 1.0
    grad_t = (e - t[:, None] * grad_k) / kap[:, None]
    hess_t = -(
        np.einsum("ru,rv->ruv", grad_k, grad_t)
        + np.einsum("ru,rv->ruv", grad_t, grad_k)
        + t[:, None, None] * hess_k
    ) / kap[:, None, None]

    # first-order bias vector of (beta, phi) at the fitted values
    xtwx_inv = np.linalg.inv(xtwx)
    lev = w * np.einsum("np,rpq,nq->rn", x, xtwx_inv, x)
    iota = lev * (d2 / d)
    b_beta = -(phi_val[:, None] / 2.0) * np.einsum(
        "rpq,nq,rn->rp", xtwx_inv, x, iota
    )
    if free:
        lam = spec.m[None, :] / phi_val[:, None]
        a2s = np.sum(lam**2 * a2, axis=1)
        a3s = np.sum(lam**3 * a3, axis=1)
        i_phi = info[:, k, k]
        b_phi = (
            (a2s / (2.0 * phi_val**3) - a3s / (4.0 * phi_val**3)) / i_phi**2
            - spec.k / (2.0 * phi_val) / i_phi
        )
        b_vec = np.concatenate([b_beta, b_phi[:, None]], axis=1)
    else:
        b_vec = b_beta
    bias = np.einsum("rp,rp->r", b_vec, grad_t) + 0.5 * np.einsum(
        "rpq,rpq->r", minv, hess_t
    )
    return t, t - bias


def bootstrap_tstar_batch(spec: GlmSpec, beta_gen, phi_gen, j, seed, replicates):
    """Simulate, refit and evaluate t* for all replicates at once.

    Returns (values, ok) where ok flags replicates whose fit converged
    with finite statistics.  Draws match the one-at-a-time path: the
    replicate b uses RngStream(seed, b).
    """
    ws = workspace(spec, beta_gen)
    y_batch = np.empty((replicates, spec.n))
    for b in range(replicates):
        rng = RngStream(seed, b)
        y_batch[b] = spec.fam.simulate(ws.mu, phi_gen, spec.m, rng)
    beta, converged = batched_irls(spec, y_batch, start=beta_gen)
    if spec.dispersion_free:
        eta = beta @ spec.X.T + spec.offset
        mu = spec.fam.mu(eta)
        if spec.family == "gamma-log":
            phi = _batched_gamma_ml_phi(spec, y_batch, mu)
        else:
            phi = np.sum(spec.m * (y_batch - mu) ** 2, axis=1) / spec.n
    else:
        phi = np.full(replicates, spec.dispersion_known or 1.0)
    psi0 = float(beta_gen[j])
    t, t_star = batched_tstar(spec, beta, phi, j, psi0)
    ok = converged & np.isfinite(t_star)
    return t_star, ok
