"""Separation detection for binomial GLMs via linear programming.

A direction gamma separates the data when (2 y_i - 1) x_i' gamma >= 0
for every all-success/all-failure row, with strict inequality somewhere
(rows observed at both response values pin x_i' gamma = 0).  Because
the model matrix has full column rank, any feasible nonzero direction
is automatically strict somewhere, so feasibility is decided by
maximising the sum of the constraint slacks over the box [-1, 1]^k.
Separation is complete when the slack can be made strictly positive on
every row, quasi-complete (partial) otherwise, and the set of divergent
coefficients collects every index with a separating direction of
nonzero component, found by per-coefficient objectives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ..errors import LpCycleLimit

_TOL = 1e-7


@dataclass
class SeparationStatus:
    kind: str  # "none", "partial", "complete"
    divergent: np.ndarray
    direction: np.ndarray | None = None

    def __bool__(self):
        return self.kind != "none"


def _solve(c, a_ub, b_ub, a_eq, b_eq, bounds):
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
    )
    if res.status not in (0, 3):  # optimal or unbounded
        raise LpCycleLimit(f"separation LP failed: {res.message}")
    return res


def _heuristic(spec) -> SeparationStatus:
    """Fallback when the LP solver fails: large-coefficient screen."""
    from .fit import fit_ml

    try:
        fit = fit_ml(spec)
    except Exception:
        return SeparationStatus("none", np.zeros(spec.k, dtype=bool))
    divergent = np.abs(fit.beta) > 20.0
    kind = "partial" if divergent.any() else "none"
    return SeparationStatus(kind, divergent, None)


def detect_separation(spec) -> SeparationStatus:
    """Classify a binomial design as not/partially/completely separated."""
    if not spec.family.startswith("binomial"):
        raise ValueError("separation detection applies to binomial families")
    x = spec.X
    y = spec.y
    n, k = x.shape
    boundary = (y <= 0.0) | (y >= 1.0)
    signs = np.where(y >= 1.0, 1.0, -1.0)[boundary]
    a_bnd = signs[:, None] * x[boundary]  # rows require a_bnd @ gamma >= 0
    interior = ~boundary
    a_eq = x[interior] if interior.any() else None
    b_eq = np.zeros(int(interior.sum())) if interior.any() else None
    bounds = [(-1.0, 1.0)] * k
    try:
        # Feasibility: maximise total slack; positive optimum => separation
        res = _solve(
            -a_bnd.sum(axis=0), -a_bnd, np.zeros(a_bnd.shape[0]), a_eq, b_eq, bounds
        )
        total = -res.fun if res.status == 0 else np.inf
        if total <= _TOL:
            return SeparationStatus("none", np.zeros(k, dtype=bool))
        direction = res.x
        # Completeness: can every slack be strictly positive?
        complete = False
        if not interior.any():
            c = np.zeros(k + 1)
            c[k] = -1.0
            a_ub = np.hstack([-a_bnd, np.ones((a_bnd.shape[0], 1))])
            res2 = _solve(
                c, a_ub, np.zeros(a_bnd.shape[0]), None, None, bounds + [(0.0, 1.0)]
            )
            if res2.status == 0 and res2.x[k] > _TOL:
                complete = True
                direction = res2.x[:k]
        # Divergent set: coefficients admitting a separating direction
        divergent = np.zeros(k, dtype=bool)
        for j in range(k):
            for sense in (1.0, -1.0):
                c = np.zeros(k)
                c[j] = -sense
                res3 = _solve(c, -a_bnd, np.zeros(a_bnd.shape[0]), a_eq, b_eq, bounds)
                if res3.status == 0 and sense * res3.x[j] > _TOL:
                    divergent[j] = True
                    break
    except LpCycleLimit:
        return _heuristic(spec)
    return SeparationStatus("complete" if complete else "partial", divergent, direction)
