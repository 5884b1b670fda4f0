from .ising import (
    IsingLattice,
    IsingRun,
    blocked_mean,
    boltzmann_weights,
    chain_stationary,
    detailed_balance_residual,
    empirical_distribution,
    glauber_chain,
    glauber_flip_prob,
    simulate_ising,
)
from .microcanonical import (
    ErgodicityCheck,
    MicrocanonicalModel,
    ThermalSeries,
    bell_ergodicity_check,
    build_microcanonical,
    fraction_variance,
    participation_ratio,
    random_subspace_state,
    start_sector_state,
    thermal_expectations,
)

__all__ = [
    "ErgodicityCheck",
    "IsingLattice",
    "IsingRun",
    "MicrocanonicalModel",
    "ThermalSeries",
    "bell_ergodicity_check",
    "blocked_mean",
    "boltzmann_weights",
    "build_microcanonical",
    "chain_stationary",
    "detailed_balance_residual",
    "empirical_distribution",
    "fraction_variance",
    "glauber_chain",
    "glauber_flip_prob",
    "participation_ratio",
    "random_subspace_state",
    "simulate_ising",
    "start_sector_state",
    "thermal_expectations",
]
