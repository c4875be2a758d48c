"""P-values, interval inversion and bootstrap adjustments."""

from .bootstrap import (
    BootstrapPlan,
    empirical_quantile,
    replicate_statistics,
    scale_adjusted_statistic,
    studentized_bootstrap_ci,
)
from .intervals import IntervalEstimate, invert_ci, invert_statistic_grid
from .pvalues import p_value

__all__ = [
    "BootstrapPlan",
    "empirical_quantile",
    "replicate_statistics",
    "scale_adjusted_statistic",
    "studentized_bootstrap_ci",
    "IntervalEstimate",
    "invert_ci",
    "invert_statistic_grid",
    "p_value",
]
