"""
measure/devices.py

Behavior:
    - Polarization basis and the noisy polarizing beam splitter.
    - Environment overlap |<E1|E2>| = (1 - eps)^N kept in log space, and the
      interference visibility it leaves on a two-branch superposition.
"""
from __future__ import annotations

import math

import numpy as np

from quantum.qcore import InvalidInputError, OperatorMatrix, PovmKind, PovmSet, StateVector

POLARIZATION_LABELS = ("h", "v")


def polarization_state(c1: complex, c2: complex) -> StateVector:
    """c1|h> + c2|v>"""
    return StateVector.from_coefficients([c1, c2], POLARIZATION_LABELS)


def polarizer_ops() -> PovmSet:
    """Ideal splitter: projectors onto |h> and |v>."""
    return noisy_splitter_ops(0.0)


def noisy_splitter_ops(epsilon: float) -> PovmSet:
    """
    Measurement operators of a beam splitter that sends a fraction of each
    polarization to the wrong detector.

    :param epsilon: leakage amplitude in [0, 1]
    :return: Kraus pair (Omega_h, Omega_v)
    """
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidInputError(f"splitter leakage must lie in [0, 1], got {epsilon}")
    keep = math.sqrt(1.0 - epsilon ** 2)
    omega_h = np.diag([keep, epsilon]).astype(complex)
    omega_v = np.diag([epsilon, keep]).astype(complex)
    return PovmSet(
        (OperatorMatrix(omega_h, hermitian=True, name="Omega_h"), OperatorMatrix(omega_v, hermitian=True, name="Omega_v")),
        PovmKind.KRAUS,
        POLARIZATION_LABELS,
    )


def log_environment_overlap(epsilon: float, n_dof: int) -> float:
    """ln |<E1|E2>| for N environment degrees of freedom each overlapping by (1 - eps)."""
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidInputError(f"per-dof distinguishability must lie in [0, 1], got {epsilon}")
    if n_dof < 0:
        raise InvalidInputError(f"number of environment degrees of freedom must be >= 0, got {n_dof}")
    if n_dof == 0:
        return 0.0
    if epsilon == 1.0:
        return -math.inf
    return n_dof * math.log1p(-epsilon)


def environment_overlap(epsilon: float, n_dof: int) -> float:
    return math.exp(log_environment_overlap(epsilon, n_dof))


def decohered_interference(c1: complex, c2: complex, overlap: float) -> float:
    """
    Interference term 2 Re(c1* c2 <E1|E2>) seen by an observable that mixes
    the two branches; the environment overlap multiplies the visibility.
    """
    return 2.0 * float(np.real(np.conj(c1) * c2)) * overlap
