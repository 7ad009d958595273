"""Mechanics on Lie algebroids in a single chart.

Submodules: ``core`` (structure data, brackets, forms, validation),
``prolongation``, ``dynamics``, ``variational``, ``morphism``, ``control``,
``expressions`` (JSON loaders) and ``scenarios`` (builtin library and runner).
"""

from .control import (OptimalControlProblem, control_hamiltonian, criticality_residuals, critical_rhs,
                      integrate_critical, reduce_control, solve_stationarity)
from .core import (AlgebroidForm, Chart, LieAlgebroid, SectionField, bracket, exterior_d,
                   lie_algebra_algebroid, lie_derivative, product_algebroid, so3_algebroid,
                   tangent_algebroid, validate)
from .dynamics import (HamiltonianSystem, LagrangianSystem, integrate_hamiltonian, integrate_lagrangian,
                       poisson_bracket, symplectic_residual)
from .errors import AlgebroidError
from .morphism import (AlgebroidMorphism, check_admissible, check_morphism, contragredient,
                       pushforward_trajectory, verify_reduction)
from .prolongation import prolong
from .trajectory import CriticalTrajectory, Trajectory
from .variational import action, action_derivative, criticality_certificate

__version__ = "0.1.0"

__all__ = [
    "AlgebroidError", "AlgebroidForm", "AlgebroidMorphism", "Chart", "CriticalTrajectory",
    "HamiltonianSystem", "LagrangianSystem", "LieAlgebroid", "OptimalControlProblem", "SectionField",
    "Trajectory", "action", "action_derivative", "bracket", "check_admissible", "check_morphism",
    "contragredient", "control_hamiltonian", "critical_rhs", "criticality_certificate",
    "criticality_residuals", "exterior_d", "integrate_critical", "integrate_hamiltonian",
    "integrate_lagrangian", "lie_algebra_algebroid", "lie_derivative", "poisson_bracket",
    "product_algebroid", "prolong", "pushforward_trajectory", "reduce_control", "so3_algebroid",
    "solve_stationarity", "symplectic_residual", "tangent_algebroid", "validate", "verify_reduction",
]
