"""Stiff coupled-string system: direct solver, KdV/effective-wave asymptotics,
and convergence verification."""

__version__ = "0.1.0"

from .core import (
    Epsilon,
    FieldPair,
    Grid1D,
    InitialConditionKind,
    InitialConditionSpec,
    NonlinearitySpec,
    PhysParams,
    Profile,
    ProfileKind,
    equilibrium_projection,
    evaluate_nonlinearity,
    sample_initial,
)
from .effective import (
    EffectiveParams,
    check_solvability,
    dispersion_coefficient,
    effective_speed_squared,
    flux_scaling,
    nonlinear_flux,
    verify_order2_cancellation,
)
from .full_solver import (
    SolverConfig,
    energy_functional,
    relaxation_frequency,
    relaxation_substep,
    simulate_full,
    strang_step,
    wave_substep,
)
from .regular import RegularExpansion, dalembert_u0, v0_from_u0, v1_correction
from .kdv import Direction, KdvState, kdv_rhs, kdv_step, sech2_soliton, simulate_kdv
from .composer import (
    BurstAsymptotics,
    build_burst_asymptotics,
    compose,
    split_initial_burst,
)
from .verifier import (
    ErrorReport,
    SweepMode,
    SweepProblem,
    burst_benchmark,
    convergence_sweep,
    dominant_frequency,
    error_norms,
    hump_speeds,
    pde_residual,
    remainder_check,
    smooth_benchmark,
)

__all__ = [name for name in dir() if not name.startswith("_")]
