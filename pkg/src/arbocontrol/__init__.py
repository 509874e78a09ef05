"""Numerical toolkit for a mosquito borne disease model with imperfect
vaccination and vector control.

The package covers the model right hand side and its variants, offspring
and reproduction number thresholds, endemic equilibrium polynomials and
solvers, stability and bifurcation analysis, pulse control simulation,
and local plus global sensitivity analysis, with a CLI front end.
"""

__version__ = "0.1.0"

from .model import (
    ModelParams,
    ModelVariant,
    ControlOverrides,
    DerivedConstants,
    derive_constants,
    rhs,
    force_of_infection,
    region_bounds,
    in_feasible_region,
    DegeneratePopulationError,
)
from .equilibria import (
    ThresholdReport,
    EndemicPolynomial,
    Equilibrium,
    EquilibriumSolveReport,
    NumericalError,
    offspring_number,
    reproduction_number,
    reproduction_number_ngm,
    control_reproduction_number,
    beta_hv_critical,
    compute_thresholds,
    disease_free_state,
    endemic_polynomial,
    back_substitute,
    solve_endemic,
)
from .stability import (
    StabilityVerdict,
    BifurcationReport,
    DegenerateBifurcationError,
    jacobian,
    dfe_jacobian,
    classify,
    bifurcation_coefficients,
    bifurcation_sweep,
    lyapunov_trivial,
    routh_hurwitz_phi2,
)
from .simulate import (
    PulseEntry,
    PulseSchedule,
    Trajectory,
    StrategySummary,
    IntegrationError,
    PositivityError,
    integrate,
    run_strategy,
    strategy_params,
    DEFAULT_INITIAL_STATE,
)
from .sensitivity import (
    local_index,
    local_indices,
    default_ranges,
    lhs_sample,
    reproduction_outputs,
    prcc,
    prcc_table,
)

__all__ = [
    "__version__",
    "ModelParams", "ModelVariant", "ControlOverrides", "DerivedConstants",
    "derive_constants", "rhs", "force_of_infection", "region_bounds",
    "in_feasible_region", "DegeneratePopulationError",
    "ThresholdReport", "EndemicPolynomial", "Equilibrium",
    "EquilibriumSolveReport", "NumericalError", "offspring_number",
    "reproduction_number", "reproduction_number_ngm",
    "control_reproduction_number", "beta_hv_critical", "compute_thresholds",
    "disease_free_state", "endemic_polynomial", "back_substitute",
    "solve_endemic",
    "StabilityVerdict", "BifurcationReport", "DegenerateBifurcationError",
    "jacobian", "dfe_jacobian", "classify", "bifurcation_coefficients",
    "bifurcation_sweep", "lyapunov_trivial", "routh_hurwitz_phi2",
    "PulseEntry", "PulseSchedule", "Trajectory", "StrategySummary",
    "IntegrationError", "PositivityError", "integrate", "run_strategy",
    "strategy_params", "DEFAULT_INITIAL_STATE",
    "local_index", "local_indices", "default_ranges", "lhs_sample",
    "reproduction_outputs", "prcc", "prcc_table",
]
