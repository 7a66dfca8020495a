"""Green-operator toolkit for nonlocal semilinear problems ``L u = u**p + lam * mu``.

The equation is handled through its integral form ``u = G[u**p] + lam G[mu]``
with ``G`` the Green operator of a fractional-type operator on a bounded
domain.  Submodules:

``domain``      intervals, balls and boundary-graded grids
``kernel``      Green kernels (restricted and spectral fractional Laplacian)
``measure``     weighted Radon measures
``greenop``     Nystrom discretization and grid-function norms
``semilinear``  minimal branch, extremal parameter, mountain-pass branch
``spectral``    eigenpairs and the stability index
``verify``      numerical checks of kernel inequalities
``cli``         config-driven experiment runner
"""

from .domain import Domain, Grid, boundary_distance, make_graded_grid
from .errors import (
    AssumptionError,
    BracketError,
    ConfigurationError,
    DegenerateInputError,
    DomainError,
    NonlocalError,
    NumericalError,
    PreconditionError,
    SearchError,
    SingularityError,
    UnsupportedError,
)
from .greenop import (
    DiscreteGreenOperator,
    apply_to_function,
    apply_to_measure,
    assemble,
    load_matrix,
    marcinkiewicz_norm,
    trace_quotient,
    weighted_lp_norm,
)
from .kernel import (
    GreenKernel,
    KernelParams,
    ScanResult,
    boundary_weight,
    comparison_kernel,
    critical_exponent,
    dimension_threshold,
    green_rfl_ball,
    green_sfl,
    green_sfl_exact,
    kernel_estimate_scan,
    marcinkiewicz_exponent,
    satisfies_dimension_condition,
)
from .measure import WeightedMeasure, boundary_concentrated_dirac, normalize, weighted_norm
from .semilinear import (
    EnergyFunctional,
    SemilinearProblem,
    SolveReport,
    bifurcation_sweep,
    check_solution_bounds,
    lambda_star,
    lambda_upper_bound,
    minimal_solution,
    residual,
    second_solution,
    self_improve_constant,
    supersolution_scale,
)
from .spectral import EigenPair, base_eigen, eigen_report, stability_index, weighted_first_eigenvalue
from .verify import check_3g, check_marcinkiewicz_uniform, nonexistence_probe, probe_integral

__version__ = "0.1.0"
