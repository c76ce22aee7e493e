"""Least-squares moving-mesh discontinuous Galerkin solver for 1D conservation laws.

The discrete flow field, the auxiliary viscous flux and a high-order moving
mesh geometry are solved simultaneously by a regularized Gauss-Newton
method; optimal test functions arise as the columns of the residual
Jacobian, so the weak formulation is exactly the least-squares normal
equations of the strong residual.
"""

from .assembly import (
    BoundaryCondition,
    Discretization,
    FieldState,
    ResidualSystem,
    SourceTerm,
    assemble,
    assemble_dls,
    constant_source,
    dirichlet,
    evaluate_field,
    jacobian_check,
    objective,
    outflow,
)
from .basis import ModalBasis, NodalBasis, QuadratureRule, basis_eval, default_rule, gauss_rule
from .errors import AdmissibilityError, ConfigError, GeometryError, OracleError, SolveFailure
from .mesh import (
    GeometryField,
    ReferenceMesh,
    cell_volume,
    cell_volumes,
    check_validity,
    evaluate_mapping,
    load_geometry_csv,
    project_boundary,
    project_boundary_tangent,
    save_geometry_csv,
    uniform_geometry,
    validity_tolerance,
)
from .oracles import (
    ShockProfile,
    boundary_layer_exact,
    burgers_exact,
    convergence_rate,
    l2_error,
    l2_project,
    ns_shock_ode_oracle,
    ode_polynomial,
)
from .physics import (
    AdvectionDiffusionModel,
    BurgersModel,
    FluxModel,
    NavierStokes1DModel,
    derivatives,
    normal_shock_states,
    rankine_hugoniot_defect,
)
from .solver import SolveReport, SolverConfig, damp_step, gauss_newton_solve, solve_linear_spd

__version__ = "0.1.0"
