"""Richardson-extrapolated central-difference gradients and hessians.

The default scheme takes four step levels with a reduction factor of
two, starting from a per-coordinate step ``max(h0, h0 * |x_u|)`` with
``h0 = 1e-4`` for gradients.  Second differences lose two powers of h
to cancellation, so hessians default to the larger base step 2e-2;
with four halvings the remaining roundoff is ~1e-10 while Richardson
removes the truncation terms.  Central differences have an even error
expansion, so each Richardson level cancels one power of h^2; four
levels make polynomials of degree <= 4 exact up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteEvaluation


@dataclass(frozen=True)
class DiffSpec:
    """Step policy for numerical differentiation.

    Per-coordinate base step: ``max(floor, initial_step * |x_u|)``,
    with ``floor`` defaulting to ``initial_step`` (so the gradient
    default is max(1e-4, 1e-4 |x_u|)).  Hessians use a larger relative
    step with a smaller absolute floor to survive second-difference
    cancellation without overstepping small-scale coordinates such as
    dispersion parameters.
    """

    initial_step: float = 1e-4
    richardson_levels: int = 4
    step_reduction: float = 2.0
    floor: float | None = None

    def __post_init__(self):
        if self.initial_step <= 0:
            raise ValueError("initial_step must be > 0")
        if self.richardson_levels < 2:
            raise ValueError("richardson_levels must be >= 2")
        if self.step_reduction <= 1:
            raise ValueError("step_reduction must be > 1")
        if self.floor is not None and self.floor <= 0:
            raise ValueError("floor must be > 0")

    def steps(self, x):
        """Per-coordinate base steps for an evaluation point x."""
        x = np.asarray(x, dtype=float)
        floor = self.initial_step if self.floor is None else self.floor
        return np.maximum(floor, self.initial_step * np.abs(x))


def _eval(f, x):
    val = float(f(x))
    if not np.isfinite(val):
        raise NonFiniteEvaluation("function evaluation returned a non-finite value")
    return val


def _extrapolate(estimates, factor):
    """Richardson table for a sequence of O(h^2)-error estimates.

    ``estimates[k]`` uses step h / factor^k; successive columns cancel
    h^2, h^4, ... terms.
    """
    t = [np.asarray(e, dtype=float) for e in estimates]
    f2 = factor * factor
    m = len(t)
    for col in range(1, m):
        w = f2**col
        t = [(w * t[k + 1] - t[k]) / (w - 1.0) for k in range(m - col)]
    return t[0]


def num_gradient(f, x, spec=DiffSpec()):
    """Gradient of a scalar function of p reals at x."""
    x = np.asarray(x, dtype=float)
    h0 = spec.steps(x)
    p = x.size
    grad = np.empty(p)
    for u in range(p):
        estimates = []
        h = h0[u]
        for _ in range(spec.richardson_levels):
            xp = x.copy()
            xm = x.copy()
            xp[u] += h
            xm[u] -= h
            estimates.append((_eval(f, xp) - _eval(f, xm)) / (2.0 * h))
            h /= spec.step_reduction
        grad[u] = _extrapolate(estimates, spec.step_reduction)
    return grad


HESSIAN_SPEC = DiffSpec(initial_step=2e-2, floor=1e-3)


def num_hessian(f, x, spec=HESSIAN_SPEC):
    """Symmetrised hessian of a scalar function of p reals at x."""
    x = np.asarray(x, dtype=float)
    h0 = spec.steps(x)
    p = x.size
    hess = np.empty((p, p))
    f0 = _eval(f, x)
    for u in range(p):
        estimates = []
        h = h0[u]
        for _ in range(spec.richardson_levels):
            xp = x.copy()
            xm = x.copy()
            xp[u] += h
            xm[u] -= h
            estimates.append((_eval(f, xp) - 2.0 * f0 + _eval(f, xm)) / (h * h))
            h /= spec.step_reduction
        hess[u, u] = _extrapolate(estimates, spec.step_reduction)
    for u in range(p):
        for v in range(u + 1, p):
            estimates = []
            hu, hv = h0[u], h0[v]
            for _ in range(spec.richardson_levels):
                xpp = x.copy()
                xpm = x.copy()
                xmp = x.copy()
                xmm = x.copy()
                xpp[u] += hu
                xpp[v] += hv
                xpm[u] += hu
                xpm[v] -= hv
                xmp[u] -= hu
                xmp[v] += hv
                xmm[u] -= hu
                xmm[v] -= hv
                estimates.append(
                    (_eval(f, xpp) - _eval(f, xpm) - _eval(f, xmp) + _eval(f, xmm))
                    / (4.0 * hu * hv)
                )
                hu /= spec.step_reduction
                hv /= spec.step_reduction
            hess[u, v] = hess[v, u] = _extrapolate(estimates, spec.step_reduction)
    return 0.5 * (hess + hess.T)


def num_gradient_multi(f, x, spec=DiffSpec()):
    """Gradient of a vector-valued function; returns shape (p, m).

    Shares probe evaluations across output components, which matters
    when every component is a by-product of one expensive computation
    (all standard errors from a single information inverse).
    """
    x = np.asarray(x, dtype=float)
    h0 = spec.steps(x)
    p = x.size

    def eval_vec(y):
        out = np.asarray(f(y), dtype=float)
        if not np.all(np.isfinite(out)):
            raise NonFiniteEvaluation("vector probe returned a non-finite value")
        return out

    rows = []
    for u in range(p):
        estimates = []
        h = h0[u]
        for _ in range(spec.richardson_levels):
            xp = x.copy()
            xm = x.copy()
            xp[u] += h
            xm[u] -= h
            estimates.append((eval_vec(xp) - eval_vec(xm)) / (2.0 * h))
            h /= spec.step_reduction
        rows.append(_extrapolate(estimates, spec.step_reduction))
    return np.stack(rows, axis=0)


def num_hessian_multi(f, x, spec=HESSIAN_SPEC):
    """Hessian of a vector-valued function; returns shape (p, p, m)."""
    x = np.asarray(x, dtype=float)
    h0 = spec.steps(x)
    p = x.size

    def eval_vec(y):
        out = np.asarray(f(y), dtype=float)
        if not np.all(np.isfinite(out)):
            raise NonFiniteEvaluation("vector probe returned a non-finite value")
        return out

    f0 = eval_vec(x)
    m = f0.size
    hess = np.empty((p, p, m))
    for u in range(p):
        estimates = []
        h = h0[u]
        for _ in range(spec.richardson_levels):
            xp = x.copy()
            xm = x.copy()
            xp[u] += h
            xm[u] -= h
            estimates.append((eval_vec(xp) - 2.0 * f0 + eval_vec(xm)) / (h * h))
            h /= spec.step_reduction
        hess[u, u] = _extrapolate(estimates, spec.step_reduction)
    for u in range(p):
        for v in range(u + 1, p):
            estimates = []
            hu, hv = h0[u], h0[v]
            for _ in range(spec.richardson_levels):
                xpp = x.copy()
                xpm = x.copy()
                xmp = x.copy()
                xmm = x.copy()
                xpp[u] += hu
                xpp[v] += hv
                xpm[u] += hu
                xpm[v] -= hv
                xmp[u] -= hu
                xmp[v] += hv
                xmm[u] -= hu
                xmm[v] -= hv
                estimates.append(
                    (eval_vec(xpp) - eval_vec(xpm) - eval_vec(xmp) + eval_vec(xmm))
                    / (4.0 * hu * hv)
                )
                hu /= spec.step_reduction
                hv /= spec.step_reduction
            hess[u, v] = hess[v, u] = _extrapolate(estimates, spec.step_reduction)
    return hess
