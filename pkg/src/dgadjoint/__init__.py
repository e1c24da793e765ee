"""Discrete adjoints and exact gradients for 1D nodal discontinuous Galerkin
discretizations of linear hyperbolic systems."""

__version__ = "0.1.0"

from .assembly import SemiDiscreteSystem, adjoint_operator, state_operator
from .basis import COLLOCATION, OVER_INTEGRATION, build_basis
from .mesh import Mesh1D, uniform_mesh
from .models import ACOUSTIC, ADVECTION, MAXWELL, ModelSpec
from .objective import CostSpec, GradientReport, compute_gradient, directional_derivative, evaluate_cost
from .problems import Problem, canonical_problem, direction, wave_problem
from .timestep import run_adjoint, run_forward
from .verification import adjoint_identity_check, convergence_study, fd_sweep, weak_strong_consistency

__all__ = [
    "SemiDiscreteSystem", "adjoint_operator", "state_operator",
    "COLLOCATION", "OVER_INTEGRATION", "build_basis",
    "Mesh1D", "uniform_mesh",
    "ACOUSTIC", "ADVECTION", "MAXWELL", "ModelSpec",
    "CostSpec", "GradientReport", "compute_gradient", "directional_derivative", "evaluate_cost",
    "Problem", "canonical_problem", "direction", "wave_problem",
    "run_adjoint", "run_forward",
    "adjoint_identity_check", "convergence_study", "fd_sweep", "weak_strong_consistency",
]
