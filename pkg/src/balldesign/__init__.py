"""Locally D-optimal designs on the k-dimensional unit ball.

Covers generalized linear models whose elemental information is
``lambda(f(x)'beta) f(x) f(x)'`` with ``f(x) = (1, x_1, ..., x_k)``: logit,
probit and exponential (Poisson-type) intensities, plus user-supplied ones.
"""

from .core import (
    ExactDesign,
    MarginalDesign,
    SingularDesignError,
    elemental_info,
    exact_info,
    exact_log_det,
    log_det_two_point,
    marginal_info,
    marginal_log_det,
    sensitivity,
)
from .discretize import (
    OrbitDiscretization,
    d_efficiency,
    discretize_design,
    orbit_vertices,
)
from .equivariance import CanonicalProblem, canonicalize, push_forward
from .models import (
    EXPONENTIAL,
    LOGIT,
    PROBIT,
    DomainError,
    IntensityModel,
    ShiftedIntensity,
    get_model,
    lam,
    lam_prime,
    q_bundle,
    u_second,
)
from .solver import (
    CaseLabel,
    ConvergenceError,
    SolveReport,
    asymptotic_inner_point,
    classify,
    solve,
    solve_case_a,
    solve_case_b,
    solve_case_c,
    solve_degenerate,
)
from .verify import KWResult, kw_check, oracle_three_point, oracle_two_point

__version__ = "0.1.0"

__all__ = [
    "ExactDesign",
    "MarginalDesign",
    "SingularDesignError",
    "elemental_info",
    "exact_info",
    "exact_log_det",
    "log_det_two_point",
    "marginal_info",
    "marginal_log_det",
    "sensitivity",
    "OrbitDiscretization",
    "d_efficiency",
    "discretize_design",
    "orbit_vertices",
    "CanonicalProblem",
    "canonicalize",
    "push_forward",
    "EXPONENTIAL",
    "LOGIT",
    "PROBIT",
    "DomainError",
    "IntensityModel",
    "ShiftedIntensity",
    "get_model",
    "lam",
    "lam_prime",
    "q_bundle",
    "u_second",
    "CaseLabel",
    "ConvergenceError",
    "SolveReport",
    "asymptotic_inner_point",
    "classify",
    "solve",
    "solve_case_a",
    "solve_case_b",
    "solve_case_c",
    "solve_degenerate",
    "KWResult",
    "kw_check",
    "oracle_three_point",
    "oracle_two_point",
]
