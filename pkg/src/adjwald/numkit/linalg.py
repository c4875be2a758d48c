"""Dense symmetric-positive-definite linear algebra.

Inversion is realised exclusively through Cholesky factorisation.  A
single jitter retry (1e-10 times the mean diagonal added to the
diagonal) is attempted before ``NotPositiveDefinite`` is raised, since
information matrices near data separation are routinely ill-conditioned
but still usable.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..errors import NotPositiveDefinite

SYMMETRY_RTOL = 1e-10


def check_symmetric(a, name="matrix"):
    """Raise when A deviates from symmetry beyond the documented tolerance."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    dev = np.abs(a - a.T)
    tol = SYMMETRY_RTOL * (1.0 + np.abs(a))
    if np.any(dev > tol):
        raise ValueError(f"{name} is not symmetric within tolerance")
    return a


def solve_spd(a, b):
    """Solve A X = B for symmetric positive definite A.

    Satisfies ``max|A X - B| <= 1e-8 * max|B|`` for well-scaled inputs.
    """
    a = check_symmetric(a, "A")
    b = np.asarray(b, dtype=float)
    try:
        c, low = cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * np.mean(np.diag(a)) if a.shape[0] else 0.0
        try:
            c, low = cho_factor(
                a + jitter * np.eye(a.shape[0]), lower=True, check_finite=False
            )
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(
                "Cholesky factorisation failed (pivot <= 0) even after jitter"
            ) from exc
    return cho_solve((c, low), b, check_finite=False)


def inv_spd(a):
    """Inverse of a symmetric positive definite matrix via Cholesky."""
    a = np.asarray(a, dtype=float)
    out = solve_spd(a, np.eye(a.shape[0]))
    return 0.5 * (out + out.T)
