"""Fourth-order compact ADI solver for 2D Riesz space-fractional
nonlinear reaction-diffusion equations on rectangles with homogeneous
Dirichlet boundaries, with built-in verification oracles, operator
property checks, convergence benchmarking, and an excitable-media driver.
"""

__version__ = "0.1.0"

from .grid import DomainSpec, Grid2D, ProblemSpec, TimeGrid, sample_field, sample_initial
from .linalg import SweepMatrix, build_sweep_matrix, sweep_solve
from .operators import (
    FracOperator1D,
    apply_compact_1d,
    apply_frac_1d,
    build_frac_operator,
    compact_accuracy_probe,
    compact_smooth_2d,
    riesz_coefficients,
    riesz_weight,
)
from .problems import (
    FhnParams,
    ManufacturedProblem,
    fhn_domain,
    fhn_initial,
    fhn_reaction,
    fhn_recovery_step,
    manufactured_exact,
    manufactured_source,
    run_fhn,
)
from .stepper import (
    AdiWorkspace,
    NonFiniteFieldError,
    StepperState,
    adi_step,
    adi_step_fields,
    bdf2_apply,
    history_rhs,
    linearized_source,
    run,
    sigma_schedule,
    stability_bound,
)
from .verify import (
    ConvergenceLevel,
    ConvergenceReport,
    ErrorPair,
    PropertyReport,
    adi_oracle_gap,
    assemble_full_system,
    assemble_history_operator,
    error_norms,
    kron_sweep_matrix,
    manufactured_convergence,
    observed_order,
    operator_property_suite,
    polynomial_riesz_derivative,
    splitting_residual,
    truncation_order_probe,
)

__all__ = [
    "AdiWorkspace",
    "ConvergenceLevel",
    "ConvergenceReport",
    "DomainSpec",
    "ErrorPair",
    "FhnParams",
    "FracOperator1D",
    "Grid2D",
    "ManufacturedProblem",
    "NonFiniteFieldError",
    "ProblemSpec",
    "PropertyReport",
    "StepperState",
    "SweepMatrix",
    "TimeGrid",
    "adi_oracle_gap",
    "adi_step",
    "adi_step_fields",
    "apply_compact_1d",
    "apply_frac_1d",
    "assemble_full_system",
    "assemble_history_operator",
    "bdf2_apply",
    "build_frac_operator",
    "build_sweep_matrix",
    "compact_accuracy_probe",
    "compact_smooth_2d",
    "error_norms",
    "fhn_domain",
    "fhn_initial",
    "fhn_reaction",
    "fhn_recovery_step",
    "history_rhs",
    "kron_sweep_matrix",
    "linearized_source",
    "manufactured_convergence",
    "manufactured_exact",
    "manufactured_source",
    "observed_order",
    "operator_property_suite",
    "polynomial_riesz_derivative",
    "riesz_coefficients",
    "riesz_weight",
    "run",
    "run_fhn",
    "sample_field",
    "sample_initial",
    "sigma_schedule",
    "splitting_residual",
    "stability_bound",
    "sweep_solve",
    "truncation_order_probe",
]
