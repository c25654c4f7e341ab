"""Dark-state sideband cooling of trapped Lambda atoms with
nonreciprocal decay channels: full and effective master equations,
steady-state and time-domain solvers, closed-form occupations and a
sweep harness for the cooling-ratio maps."""

__version__ = "0.1.0"

from .analytic import (
    ReducedSolution,
    SingularReducedSystemError,
    closed_form_n1,
    lamb_dicke_limit_n1,
    ratio_limit,
    reduced_linear_system,
    single_atom_occupation,
)
from .core import (
    HilbertSpace,
    SpaceSizeError,
    apply_superoperator,
    build_space,
    chiral_dissipator_term,
    destroy,
    expectation,
    hamiltonian_liouvillian,
    phonon_annihilation,
    phonon_number,
    site_operator,
    transition_operator,
)
from .darkstate import (
    EffectiveParams,
    ValidityReport,
    dressed_energies,
    effective_liouvillian,
    effective_params,
    mixing_angles,
    validity_report,
)
from .dynamics import (
    ConvergenceError,
    CoolingRatioResult,
    DegenerateSteadyStateError,
    IntegrationError,
    SteadyStateResult,
    Trajectory,
    convergence_check,
    cooling_ratio,
    default_time_grid,
    evolve,
    steady_state,
    thermal_state,
)
from .model import (
    PhysicalParams,
    chiral_dissipator,
    chiral_exchange_hamiltonian,
    eit_resonance_detuning,
    lamb_dicke_hamiltonian,
    liouvillian,
    space_for,
)
from .sweeps import (
    Axis,
    ConfigError,
    ResultRecord,
    SolverOptions,
    SweepSpec,
    emit_outputs,
    parse_config,
    resolve_point,
    run_sweep,
    scenario_spec,
)

__all__ = [name for name in dir() if not name.startswith("_")]
