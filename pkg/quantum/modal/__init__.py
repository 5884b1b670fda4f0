from .cut import CutSpec, LocalDecomposition, local_states
from .engine import (
    ModalEnsemble,
    ModalPath,
    RateSchedule,
    constant_schedule,
    jump_chains,
    modal_ensemble,
    path_from_schedule,
    rate_schedule,
    simulate_modal,
)
from .ergodicity import ErgodicityReport, ergodicity_report, stationary_distribution
from .pointer import PointerOverlapModel, pointer_overlap_probs
from .rates import RateMatrix, bell_rates, probability_currents, schrodinger_flow

__all__ = [
    "CutSpec",
    "ErgodicityReport",
    "LocalDecomposition",
    "ModalEnsemble",
    "ModalPath",
    "PointerOverlapModel",
    "RateMatrix",
    "RateSchedule",
    "bell_rates",
    "constant_schedule",
    "ergodicity_report",
    "jump_chains",
    "local_states",
    "modal_ensemble",
    "path_from_schedule",
    "pointer_overlap_probs",
    "probability_currents",
    "rate_schedule",
    "schrodinger_flow",
    "simulate_modal",
    "stationary_distribution",
]
