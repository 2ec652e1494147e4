"""Rough-path numerics for smooth stationary approximations of fBm drivers.

Subpackages:
    fbm        grids, exact fractional Brownian sampling, Wiener shift
    lift       level-2 lifts, Chen reconstruction, geometricity diagnostics
    wongzakai  the smooth stationary approximant W_delta and its lift
    norms      p-variation programs, Hoelder/variation metrics, stopping times
    rde        controlled paths, rough integrals, the one-step solver, bounds
    rds        rough-path shifts and cocycle residuals
    expcli     convergence experiments and their command-line front end
"""

from .fbm import (
    CovarianceFactorizationError,
    FbmParams,
    FbmSampler,
    GridAlignmentError,
    SamplePath,
    TimeGrid,
    fbm_covariance,
    path_rng,
    sample_fbm,
    wiener_shift,
)
from .lift import (
    GridRoughPath,
    Level2Value,
    SigmaConcavityReport,
    chen_combine,
    geometricity_defect_entrywise,
    geometricity_residual,
    lift_left_riemann,
    lift_smooth_quadrature,
    reconstruct,
    sigma_concavity_check,
)
from .norms import (
    RhoVar2DResult,
    StoppingTimes,
    VariationParams,
    greedy_stopping_times,
    holder_seminorm,
    homogeneous_pvar_norm,
    pvar_level2,
    pvar_level2_distance,
    pvar_seminorm,
    rho_alpha_metric,
    rho_pvar_metric,
    rho_var_2d,
)
from .rde import (
    AprioriBoundReport,
    ControlledPath,
    IntegralDistanceReport,
    SolutionDistance,
    SolverBlowUpError,
    VECTOR_FIELD_CATALOG,
    VectorField,
    apriori_bound_check,
    builtin_vector_field,
    controlled_integrand,
    integral_distance_bound,
    remainder_norm,
    rough_integral,
    solution_distance,
    solve_rde,
)
from .expcli import (
    EXPERIMENTS,
    ConfigError,
    ConvergenceReport,
    ExperimentConfig,
    GateResult,
    MetricSummary,
    fit_loglog_slope,
    run_noise_convergence,
    run_solution_convergence,
    run_stopping_time_convergence,
    run_suite,
)
from .rds import CocycleProbe, cocycle_residual, shift_rough_path
from .wongzakai import DeltaParam, g_delta, w_delta, ww_delta, x_delta

__version__ = "0.1.0"
