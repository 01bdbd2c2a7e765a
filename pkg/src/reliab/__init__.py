"""Reliability analysis under input and surrogate-model uncertainty.

The package computes failure probabilities ``P(Y < 0)`` for a response
predicted by a Gaussian process, treating the predictive error as a standard
normal variable ``U_Y`` that is integrated out with Gauss-Hermite quadrature.
"""

from .distributions import Distribution, RandomVector, make_distribution
from .errors import ConfigError, NumericalError, ReliabError
from .form_sorm import MppOptions, MppResult, find_mpp, form_pf, sorm_breitung, sorm_curvatures, sorm_tvedt
from .ghqrm import GhqrmReport, QuadratureRule, gauss_hermite_rule, ghqrm_pf
from .gp import GpModel, fit
from .limit_state import LimitState, builtin_problem, parse_expression
from .mcs import McsResult, mcs_pf, mcs_pf_epistemic

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "Distribution", "GhqrmReport", "GpModel", "LimitState", "McsResult", "MppOptions", "MppResult",
    "NumericalError", "QuadratureRule", "RandomVector", "ReliabError", "builtin_problem", "find_mpp", "fit",
    "form_pf", "gauss_hermite_rule", "ghqrm_pf", "make_distribution", "mcs_pf", "mcs_pf_epistemic",
    "parse_expression", "sorm_breitung", "sorm_curvatures", "sorm_tvedt",
]
