"""Location-adjusted Wald inference for parametric regression models.

The package computes Wald statistics together with their first-order
location adjustment (and a bootstrap scale adjustment), p-values and
confidence intervals, for one-parameter models, exponential-dispersion
GLMs and beta regression.
"""

from . import data, numkit, oneparam
from .beta.adapter import BetaAdapter, beta_adapter
from .beta.fit import fit_beta_ml, fit_beta_rb
from .beta.model import BetaSpec, beta_expected_info, coxsnell_bias_beta
from .core import (
    ML,
    RB,
    FitResult,
    ModelAdapter,
    WaldReport,
    bias_B,
    kappa,
    location_adjusted_wald,
    statistic_curve,
    wald_statistic,
    wald_transform_derivatives,
)
from .glm.adapter import GlmAdapter, glm_adapter
from .glm.bias import coxsnell_bias, simulation_bias
from .glm.fit import GlmFit, GlmSpec, fit_ml, fit_rb
from .glm.info import expected_info, info_derivatives
from .glm.lr import signed_lr_root
from .glm.separation import detect_separation
from .harness import SimStudySpec, run_study
from .inference import (
    BootstrapPlan,
    IntervalEstimate,
    invert_ci,
    p_value,
    scale_adjusted_statistic,
    studentized_bootstrap_ci,
)

__version__ = "0.1.0"
