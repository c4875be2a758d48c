"""P-values against the standard normal or a bootstrap reference."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from ..errors import DomainError

ALTERNATIVES = ("two-sided", "less", "greater")


def p_value(statistic, alternative="two-sided", reference="standard-normal"):
    """Tail probability for an observed statistic.

    ``reference`` is either "standard-normal" or an array of bootstrap
    replicate statistics; the bootstrap tail uses the (r + 1) / (B + 1)
    convention.
    """
    if alternative not in ALTERNATIVES:
        raise DomainError(f"unknown alternative {alternative!r}")
    statistic = float(statistic)
    if not np.isfinite(statistic):
        raise DomainError("statistic must be finite")
    if isinstance(reference, str):
        if reference != "standard-normal":
            raise DomainError(f"unknown reference {reference!r}")
        if alternative == "two-sided":
            return float(2.0 * ndtr(-abs(statistic)))
        if alternative == "less":
            return float(ndtr(statistic))
        return float(1.0 - ndtr(statistic))
    table = np.asarray(reference, dtype=float)
    b = table.size
    if b == 0:
        raise DomainError("empty bootstrap reference")
    if alternative == "two-sided":
        r = int(np.sum(np.abs(table) >= abs(statistic)))
    elif alternative == "less":
        r = int(np.sum(table <= statistic))
    else:
        r = int(np.sum(table >= statistic))
    return (r + 1.0) / (b + 1.0)
