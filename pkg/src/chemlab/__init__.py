"""Numerical laboratory for a consumption-chemotaxis system with
gradient-dependent logistic damping: boundedness-condition evaluation,
a Neumann finite-difference solver, and a-priori bound monitors."""

from .conditions import (
    ConditionReport,
    ExponentSet,
    GammaClass,
    Regime,
    TheoremScopeError,
    compute_K1,
    compute_K2,
    compute_M,
    condition_a2,
    condition_general,
    critical_gamma,
    exponents,
    gamma_class,
    ode_bound,
    remark_regimes,
    search_p_eta,
)
from .config import ConfigError, ExperimentConfig, parse_config
from .model import (
    Constant,
    CosineBump,
    DomainKind,
    DomainSpec,
    FieldState,
    GaussianBump,
    Grid,
    InitialData,
    ModelParams,
    build_grid,
    cell_volumes,
    evaluate_initial,
    integrate_field,
    make_initial_data,
)
from .monitors import (
    DiagnosticsRecord,
    TrajectoryReport,
    check_interpolation_inequality,
    record,
    verify_trajectory_bounds,
)
from .solver import (
    AdvectionScheme,
    SolverConfig,
    StepOutcome,
    StepStatus,
    chemotaxis_divergence,
    gradient_magnitude_term,
    laplacian,
    rhs,
    simulate,
    step,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
