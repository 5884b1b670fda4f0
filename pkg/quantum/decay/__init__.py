from .atom import AtomFieldParams, KernelSolution, arrival_probs, decay_rate, kernel_moments, solve_memory_kernel
from .unravel import (
    DecayFit,
    UnravelEnsemble,
    UnravelRecord,
    excited_state,
    fit_decay_rate,
    homodyne_ops,
    homodyne_window,
    kraus_defect,
    ks_statistic,
    photon_counting_ops,
    survival_curve,
    unravel,
    unravel_ensemble,
)

__all__ = [
    "AtomFieldParams",
    "DecayFit",
    "KernelSolution",
    "UnravelEnsemble",
    "UnravelRecord",
    "arrival_probs",
    "decay_rate",
    "excited_state",
    "fit_decay_rate",
    "homodyne_ops",
    "homodyne_window",
    "kernel_moments",
    "kraus_defect",
    "ks_statistic",
    "photon_counting_ops",
    "solve_memory_kernel",
    "survival_curve",
    "unravel",
    "unravel_ensemble",
]
