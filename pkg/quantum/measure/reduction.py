"""
measure/reduction.py

Behavior:
    - Global state on (pointer factors) x system. Each measurement appends a
      pointer factor whose orthonormal basis states are the outcome labels.
    - reduce_global keeps only the branch of the recorded history and
      renormalizes it; future statistics are unchanged by construction.
    - Schmidt decomposition helpers for pure bipartite marginals.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from quantum.qcore import ImpossibleOutcome, InvalidInputError, OperatorMatrix, PovmKind, PovmSet, StateVector
from quantum.qcore.constants import ZERO_NORM_TOL
from quantum.qcore.linalg import evolve_step

from .trajectory import TrajectoryRecord


@dataclass(frozen=True)
class PointerRegisterState:
    state: StateVector
    pointer_dims: Tuple[int, ...]
    system_dim: int

    def __post_init__(self):
        object.__setattr__(self, "pointer_dims", tuple(int(k) for k in self.pointer_dims))
        expected = int(np.prod(self.pointer_dims, dtype=int)) * self.system_dim
        if self.state.basis_dim != expected:
            raise InvalidInputError(
                f"global state has dim {self.state.basis_dim}, pointer dims {self.pointer_dims} x system {self.system_dim}"
            )

    @classmethod
    def bare(cls, psi: StateVector) -> "PointerRegisterState":
        return cls(psi, (), psi.basis_dim)

    def tensor(self) -> np.ndarray:
        return np.asarray(self.state.amplitudes).reshape(self.pointer_dims + (self.system_dim,))


def dilate(ops: PovmSet, full: PointerRegisterState) -> PointerRegisterState:
    """
    Unitary model of a measuring device: |P>|phi> -> sum_i |P>|M_i> Omega_i|phi>.

    :param ops: Kraus operators acting on the system factor
    :param full: current global state
    :return: global state with one more pointer factor (rightmost pointer slot)
    """
    if ops.kind is not PovmKind.KRAUS:
        raise InvalidInputError("a device needs Kraus operators")
    if ops.dim != full.system_dim:
        raise InvalidInputError(f"device acts on dim {ops.dim}, system has dim {full.system_dim}")
    flat = np.asarray(full.state.amplitudes).reshape(-1, full.system_dim)
    branches = np.stack([flat @ op.entries.T for op in ops.elements], axis=1)
    return PointerRegisterState(StateVector(branches.ravel()), full.pointer_dims + (len(ops),), full.system_dim)


def evolve_global(H: OperatorMatrix, full: PointerRegisterState, dt: float) -> PointerRegisterState:
    """Unitary segment on the system factor only; pointer records are untouched."""
    flat = np.asarray(full.state.amplitudes).reshape(-1, full.system_dim)
    evolved = np.stack([evolve_step(H, StateVector(row), dt).amplitudes if np.any(row) else row for row in flat])
    return PointerRegisterState(StateVector(evolved.ravel()), full.pointer_dims, full.system_dim)


def _history_of(record) -> Tuple[int, ...]:
    if isinstance(record, TrajectoryRecord):
        return record.branch.outcome_history
    return tuple(int(i) for i in record)


def reduce_global(record, full: PointerRegisterState) -> PointerRegisterState:
    """
    Keep the branch of the recorded outcome history and renormalize it.

    :param record: TrajectoryRecord (or a plain outcome sequence) whose first
        entries label the leading pointer factors of ``full``
    :param full: global state with at least as many pointer factors as outcomes
    :raises ImpossibleOutcome: when the selected branch has zero weight
    """
    history = _history_of(record)
    if len(history) > len(full.pointer_dims):
        raise InvalidInputError(f"history {history} is longer than the pointer register {full.pointer_dims}")
    for slot, outcome in enumerate(history):
        if not 0 <= outcome < full.pointer_dims[slot]:
            raise InvalidInputError(f"outcome {outcome} out of range for pointer factor {slot}")
    if not history:
        return full

    amplitudes = full.tensor()
    mask = np.zeros_like(amplitudes, dtype=bool)
    mask[tuple(history)] = True
    reduced = np.where(mask, amplitudes, 0.0)
    weight = float(np.linalg.norm(reduced))
    if weight <= ZERO_NORM_TOL:
        raise ImpossibleOutcome(f"history {history} has zero weight in the global state")
    return PointerRegisterState(StateVector(reduced.ravel() / weight), full.pointer_dims, full.system_dim)


def pointer_branch_probs(full: PointerRegisterState) -> np.ndarray:
    """Probability of every pointer record, shape ``pointer_dims``."""
    weights = np.abs(full.tensor()) ** 2
    return weights.sum(axis=-1)


def system_branch(full: PointerRegisterState, history: Sequence[int]) -> StateVector:
    """Normalized system state attached to a complete pointer record."""
    if len(history) != len(full.pointer_dims):
        raise InvalidInputError("system_branch needs one outcome per pointer factor")
    vector = full.tensor()[tuple(history)]
    norm = float(np.linalg.norm(vector))
    if norm <= ZERO_NORM_TOL:
        raise ImpossibleOutcome(f"history {tuple(history)} has zero weight")
    return StateVector(vector / norm)


def schmidt_coefficients(state: StateVector, dims: Tuple[int, int]) -> np.ndarray:
    matrix = np.asarray(state.amplitudes).reshape(dims)
    return np.linalg.svd(matrix, compute_uv=False)


def product_factor(state: StateVector, dims: Tuple[int, int], site: int, tol: float = 1e-10) -> StateVector:
    """
    Pure state of one factor of a product state, global phase fixed so that the
    largest amplitude is real and positive.

    :raises InvalidInputError: if the state is entangled (Schmidt rank > 1)
    """
    matrix = np.asarray(state.amplitudes).reshape(dims)
    u, s, vh = np.linalg.svd(matrix)
    if s.size > 1 and s[1] > tol * max(s[0], 1.0):
        raise InvalidInputError(f"state is entangled, second Schmidt coefficient {s[1]:.3e}")
    factor = u[:, 0] if site == 0 else vh[0, :]
    pivot = factor[np.argmax(np.abs(factor))]
    return StateVector(factor * np.conj(pivot) / abs(pivot)).normalize()
