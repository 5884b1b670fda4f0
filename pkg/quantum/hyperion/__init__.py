from .classical import (
    ClassicalRotorState,
    ClassicalTrajectory,
    LyapunovResult,
    corotating_integral,
    divergence_rate,
    hamiltonian,
    integrate_classical,
    lyapunov,
    tangent_area,
)
from .ehrenfest import (
    BreakdownPoint,
    EhrenfestResult,
    LogFit,
    angle_gap,
    breakdown_point,
    ehrenfest_breakdown,
    free_spreading_width,
    minimum_uncertainty_width,
)
from .orbit import PRESETS, RotorParams, kepler_residual, orbit, preset, solve_kepler, tidal_drive
from .phase_space import (
    AbelianizationReport,
    PhaseSpaceGrid,
    RotorWavefunction,
    abelianization_residuals,
    cell_operator,
    cell_probabilities,
    choose_truncation,
    coarse_region_probability,
    coherent_state,
    completeness_on_block,
    grid_completeness,
    husimi,
    husimi_norm,
    husimi_x_marginal,
    momentum_width,
    phase_space_povm,
    povm_summary,
    region_operator,
    region_probability,
    resolution_of_identity,
    retained_block,
    smoothed_position_density,
)
from .rotor import RotorObservables, RotorPropagator, RotorSeries, evolve_rotor, rotor_history, rotor_observables
from .units import HeadlineEstimate, days, thermal_de_broglie, tq_headline

__all__ = [
    "AbelianizationReport",
    "BreakdownPoint",
    "ClassicalRotorState",
    "ClassicalTrajectory",
    "EhrenfestResult",
    "HeadlineEstimate",
    "LogFit",
    "LyapunovResult",
    "PRESETS",
    "PhaseSpaceGrid",
    "RotorObservables",
    "RotorParams",
    "RotorPropagator",
    "RotorSeries",
    "RotorWavefunction",
    "abelianization_residuals",
    "angle_gap",
    "breakdown_point",
    "cell_operator",
    "cell_probabilities",
    "choose_truncation",
    "coarse_region_probability",
    "coherent_state",
    "completeness_on_block",
    "corotating_integral",
    "days",
    "divergence_rate",
    "ehrenfest_breakdown",
    "evolve_rotor",
    "free_spreading_width",
    "grid_completeness",
    "hamiltonian",
    "husimi",
    "husimi_norm",
    "husimi_x_marginal",
    "integrate_classical",
    "kepler_residual",
    "lyapunov",
    "minimum_uncertainty_width",
    "momentum_width",
    "orbit",
    "phase_space_povm",
    "povm_summary",
    "preset",
    "region_operator",
    "region_probability",
    "resolution_of_identity",
    "retained_block",
    "rotor_history",
    "rotor_observables",
    "smoothed_position_density",
    "solve_kepler",
    "tangent_area",
    "thermal_de_broglie",
    "tidal_drive",
    "tq_headline",
]
