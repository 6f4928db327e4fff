"""Mixed finite-element solver for the 2D incompressible Navier-Stokes
equations with postprocessing-based a posteriori error estimation."""

from .mesh import Mesh, build_structured_mesh, locate_point, locate_points
from .fe_space import (MixedSpace, MixedState, build_mini_space, eval_basis,
                       evaluate_field, zero_state)
from .quadrature import QuadratureRule, rule
from .manufactured import ManufacturedCase, error_norms, exact
from .stokes import StokesProblem, solve_stokes, stokes_projection
from .integrator import (SchemeConfig, Trajectory, discrete_time_derivative,
                         initial_state, integrate, step)
from .estimator import (EstimatorReport, estimate, postprocess,
                        residual_stokes_estimator, temporal_separation_audit)

__version__ = "0.1.0"

__all__ = [
    "Mesh", "build_structured_mesh", "locate_point", "locate_points",
    "MixedSpace", "MixedState", "build_mini_space", "eval_basis",
    "evaluate_field", "zero_state", "QuadratureRule", "rule",
    "ManufacturedCase", "error_norms", "exact",
    "StokesProblem", "solve_stokes", "stokes_projection",
    "SchemeConfig", "Trajectory", "discrete_time_derivative",
    "initial_state", "integrate", "step",
    "EstimatorReport", "estimate", "postprocess",
    "residual_stokes_estimator", "temporal_separation_audit",
    "__version__",
]
