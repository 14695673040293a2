"""High-order Caputo approximation on graded meshes and a solver for time-fractional diffusion."""

from fracstep.analysis import (
    ConvergenceReport,
    SignCensus,
    max_nodal_error,
    observed_order,
    sign_census,
    spatial_study,
    temporal_study,
)
from fracstep.caputo import (
    MonomialOracle,
    TimeHistory,
    apply_discrete_caputo,
    truncation_order_study,
)
from fracstep.mesh import SpatialMesh, TemporalMesh, build_spatial_mesh, build_temporal_mesh
from fracstep.problems import (
    ManufacturedProblem,
    example_singular,
    example_smooth,
    get_problem,
    make_monomial_problem,
)
from fracstep.tfde import (
    ProblemSpec,
    SolutionField,
    SolverError,
    TridiagonalSystem,
    assemble_step,
    solve,
    thomas_solve,
)
from fracstep.weights import (
    CaputoWeightRow,
    IntervalWeights,
    assemble_row,
    cubic_interval_weights,
    first_interval_weight,
    interval_weights,
    second_interval_weights,
    uniform_coefficients,
)

__version__ = "0.1.0"
