from .errors import (
    ConvergenceError,
    ImpossibleOutcome,
    IntegrationError,
    InvalidInputError,
    NumericalGuardError,
    QuantumSimError,
    StepTooLarge,
    TruncationError,
)
from .linalg import (
    OperatorMatrix,
    StateVector,
    embed,
    evolve_step,
    expectation,
    random_hermitian,
    random_state,
    tensor,
)
from .povm import PovmKind, PovmSet, ValidationReport, check_povm
from .rng import RngStream

__all__ = [
    "ConvergenceError",
    "ImpossibleOutcome",
    "IntegrationError",
    "InvalidInputError",
    "NumericalGuardError",
    "OperatorMatrix",
    "PovmKind",
    "PovmSet",
    "QuantumSimError",
    "RngStream",
    "StateVector",
    "StepTooLarge",
    "TruncationError",
    "ValidationReport",
    "check_povm",
    "embed",
    "evolve_step",
    "expectation",
    "random_hermitian",
    "random_state",
    "tensor",
]
