"""Foundational numerics: special functions, SPD linear algebra,
seeded random streams and Richardson-extrapolation differentiation."""

from .diff import DiffSpec, HESSIAN_SPEC, num_gradient, num_hessian
from .linalg import check_symmetric, inv_spd, solve_spd
from .rng import RngStream
from .special import digamma, log_gamma, polygamma, trigamma

__all__ = [
    "DiffSpec",
    "HESSIAN_SPEC",
    "num_gradient",
    "num_hessian",
    "check_symmetric",
    "inv_spd",
    "solve_spd",
    "RngStream",
    "digamma",
    "log_gamma",
    "polygamma",
    "trigamma",
]
