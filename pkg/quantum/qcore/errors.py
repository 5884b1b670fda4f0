"""
qcore/errors.py

Behavior:
    - One exception hierarchy for the whole library.
    - Input problems derive from ValueError so callers that only know the
      builtin still catch them.
    - Guard trips carry the guard name; the CLI reports it with exit code 3.
"""


class QuantumSimError(Exception):
    """Root of every error raised by the simulation packages."""


class InvalidInputError(QuantumSimError, ValueError):
    """Rejected input: non-hermitian H, NaN, bad ranges, unnormalized states, shape mismatch."""


class ImpossibleOutcome(QuantumSimError):
    """A conditioned branch has zero norm, so the sampled outcome could not have occurred."""


class NumericalGuardError(QuantumSimError):
    guard = "numerical_guard"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class StepTooLarge(NumericalGuardError):
    guard = "step_too_large"


class TruncationError(NumericalGuardError):
    guard = "truncation"


class ConvergenceError(NumericalGuardError):
    guard = "convergence"


class IntegrationError(NumericalGuardError):
    guard = "integration_blowup"
