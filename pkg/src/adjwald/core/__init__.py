"""Model-agnostic location-adjusted Wald machinery."""

from .adapter import ML, RB, FitResult, ModelAdapter
from .wald import (
    KappaDerivatives,
    StatisticCurve,
    WaldCell,
    WaldReport,
    bias_B,
    kappa,
    kappa_derivatives,
    location_adjusted_wald,
    statistic_curve,
    wald_statistic,
    wald_transform_derivatives,
)

__all__ = [
    "ML",
    "RB",
    "FitResult",
    "ModelAdapter",
    "KappaDerivatives",
    "StatisticCurve",
    "WaldCell",
    "WaldReport",
    "bias_B",
    "kappa",
    "kappa_derivatives",
    "location_adjusted_wald",
    "statistic_curve",
    "wald_statistic",
    "wald_transform_derivatives",
]
