"""Expected information for GLMs and its analytic derivative tensors.

The information over (beta, phi) is block diagonal: X'WX / phi for the
coefficients and a scalar built from the second derivative of the
normalising function for a free dispersion.  Derivatives with respect
to beta replace W by W(2R - L)T_u and W{(2R - L)^2 + (2R' - L')}T_uT_v;
derivatives with respect to phi follow by direct differentiation of the
two blocks.
"""

from __future__ import annotations

import numpy as np

from .fit import GlmSpec, workspace


def _phi_block(spec: GlmSpec, phi):
    u = -spec.m / phi
    a2 = spec.fam.a2(u)
    return float(np.sum(spec.m**2 * a2) / (2.0 * phi**4))


def expected_info(spec: GlmSpec, beta, phi=None) -> np.ndarray:
    """Expected information at (beta, phi) over the free parameters."""
    ws = workspace(spec, beta)
    phi_val = phi if phi is not None else (spec.dispersion_known or 1.0)
    beta_block = (spec.X.T * ws.w) @ spec.X / phi_val
    if not spec.dispersion_free:
        return beta_block
    p = spec.k + 1
    out = np.zeros((p, p))
    out[: spec.k, : spec.k] = beta_block
    out[spec.k, spec.k] = _phi_block(spec, phi_val)
    return out


def info_derivatives(spec: GlmSpec, beta, phi=None):
    """(dI, d2I) tensors of the expected information over the free parameters.

    ``dI[u]`` differentiates with respect to parameter u and
    ``d2I[u, v]`` twice; the dispersion (when free) is the last index.
    """
    ws = workspace(spec, beta)
    phi_val = phi if phi is not None else (spec.dispersion_known or 1.0)
    x = spec.X
    k = spec.k
    c1 = ws.w * (2.0 * ws.r - ws.l)
    c2 = ws.w * ((2.0 * ws.r - ws.l) ** 2 + (2.0 * ws.r1 - ws.l1))
    # T1[u, b, c] = sum_i c1_i x_iu x_ib x_ic, and likewise T2 with c2
    t1 = np.einsum("i,ia,ib,ic->abc", c1, x, x, x)
    t2 = np.einsum("i,ia,ib,ic,id->abcd", c2, x, x, x, x)
    xtwx = (x.T * ws.w) @ x

    if not spec.dispersion_free:
        return t1 / phi_val, t2 / phi_val

    p = k + 1
    d_i = np.zeros((p, p, p))
    d2_i = np.zeros((p, p, p, p))
    d_i[:k, :k, :k] = t1 / phi_val
    d2_i[:k, :k, :k, :k] = t2 / phi_val

    u = -spec.m / phi_val
    m2a2 = float(np.sum(spec.m**2 * spec.fam.a2(u)))
    m3a3 = float(np.sum(spec.m**3 * spec.fam.a3(u)))
    m4a4 = float(np.sum(spec.m**4 * spec.fam.a4(u)))

    # d i / d phi: beta block -X'WX/phi^2, dispersion entry by chain rule
    d_i[k, :k, :k] = -xtwx / phi_val**2
    d_i[k, k, k] = m3a3 / (2.0 * phi_val**6) - 2.0 * m2a2 / phi_val**5

    # d^2 i / (d beta_u d phi)
    d2_i[:k, k, :k, :k] = -t1 / phi_val**2
    d2_i[k, :k, :k, :k] = -t1 / phi_val**2

    # d^2 i / d phi^2
    d2_i[k, k, :k, :k] = 2.0 * xtwx / phi_val**3
    d2_i[k, k, k, k] = (
        10.0 * m2a2 / phi_val**6
        - 5.0 * m3a3 / phi_val**7
        + m4a4 / (2.0 * phi_val**8)
    )
    return d_i, d2_i
