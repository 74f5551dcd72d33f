"""Spectral solver and verification harness for Maxwell-Chern-Simons
vortex systems on the flat unit torus."""

from .background import (
    BackgroundData,
    VortexConfig,
    background_weight,
    compute_u0,
    mollified_delta,
    no_vortices,
)
from .diagnostics import (
    ConvergenceTable,
    InvariantReport,
    MetricsRow,
    SweepRow,
    all_reports,
    check_bounds,
    check_flux,
    check_gradu,
    check_identity,
    check_max_location,
    convergence_metrics,
    residual_reports,
)
from .errors import (
    BoundsViolation,
    ConfigError,
    GridMismatch,
    MCSVortexError,
    NegativeArgument,
    NoConvergence,
    OutOfRange,
    PreconditionViolated,
    QTooSmall,
    SigmaTooSmall,
    SnapshotError,
)
from .grid import (
    GridSpec,
    ScalarField,
    SpectralCoeffs,
    from_coeffs,
    grad_squared,
    gradient,
    helmholtz_apply,
    helmholtz_solve,
    integrate,
    l2_norm,
    laplacian,
    poisson_solve,
    sobolev_norm,
    sup_norm,
    to_coeffs,
    xk_norm,
)
from .nonlinearity import (
    NonlinearityModel,
    cp1_model,
    model_from_name,
    tabulated_model,
    u1_model,
)
from .solver import (
    LimitSolution,
    ProblemSpec,
    SolutionBundle,
    coefficient_fields,
    energy,
    energy_gradient,
    initial_guess,
    q_sweep,
    recover_v,
    solve_coupled,
    solve_limit,
)

__version__ = "0.1.0"

__all__ = [
    "BackgroundData",
    "BoundsViolation",
    "ConfigError",
    "ConvergenceTable",
    "GridMismatch",
    "GridSpec",
    "InvariantReport",
    "LimitSolution",
    "MCSVortexError",
    "MetricsRow",
    "NegativeArgument",
    "NoConvergence",
    "NonlinearityModel",
    "OutOfRange",
    "PreconditionViolated",
    "ProblemSpec",
    "QTooSmall",
    "ScalarField",
    "SigmaTooSmall",
    "SnapshotError",
    "SolutionBundle",
    "SpectralCoeffs",
    "SweepRow",
    "VortexConfig",
    "all_reports",
    "background_weight",
    "check_bounds",
    "check_flux",
    "check_gradu",
    "check_identity",
    "check_max_location",
    "coefficient_fields",
    "compute_u0",
    "convergence_metrics",
    "cp1_model",
    "energy",
    "energy_gradient",
    "from_coeffs",
    "grad_squared",
    "gradient",
    "helmholtz_apply",
    "helmholtz_solve",
    "initial_guess",
    "integrate",
    "l2_norm",
    "laplacian",
    "model_from_name",
    "mollified_delta",
    "no_vortices",
    "poisson_solve",
    "q_sweep",
    "recover_v",
    "residual_reports",
    "sobolev_norm",
    "solve_coupled",
    "solve_limit",
    "sup_norm",
    "tabulated_model",
    "to_coeffs",
    "u1_model",
    "xk_norm",
]
