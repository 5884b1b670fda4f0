"""
modal/cut.py

Behavior:
    - CutSpec wraps the quasi-classical effects that define the local states.
    - local_states splits the global state into unnormalized branches
      Psi_i = Pi_i Psi with probabilities p_i = <Psi|Pi_i|Psi>.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import List

import numpy as np

from quantum.qcore import InvalidInputError, PovmKind, PovmSet, StateVector, check_povm
from quantum.qcore.constants import ALGEBRAIC_TOL

from .constants import CUT_COMPLETENESS_TOL, DEGENERATE_TOL


@dataclass(frozen=True)
class CutSpec:
    povm: PovmSet
    degenerate_tol: float = DEGENERATE_TOL

    def __post_init__(self):
        if self.povm.kind is not PovmKind.EFFECTS:
            raise InvalidInputError("a cut is defined by effects, not Kraus operators")
        report = check_povm(self.povm, tol=CUT_COMPLETENESS_TOL, probes=8, pairwise=False)
        if not report.is_complete:
            raise InvalidInputError(f"cut effects are incomplete, residual {report.completeness_residual:.3e}")

    @cached_property
    def stacked(self) -> np.ndarray:
        """Effects as one (k, d, d) array."""
        return np.stack([op.entries for op in self.povm.elements])

    @property
    def size(self) -> int:
        return len(self.povm)

    @property
    def labels(self) -> List[str]:
        return [self.povm.label(i) for i in range(self.size)]

    @classmethod
    def from_blocks(cls, block_dims, labels=None) -> "CutSpec":
        """Orthogonal projectors onto consecutive coordinate blocks."""
        total = int(sum(block_dims))
        arrays = []
        start = 0
        for size in block_dims:
            diag = np.zeros(total)
            diag[start:start + size] = 1.0
            arrays.append(np.diag(diag).astype(complex))
            start += size
        return cls(PovmSet.from_arrays(arrays, PovmKind.EFFECTS, labels))


@dataclass(frozen=True)
class LocalDecomposition:
    local_states: np.ndarray
    probs: np.ndarray
    degenerate_flag: bool

    @property
    def states(self) -> List[StateVector]:
        return [StateVector(row) for row in self.local_states]

    def normalized(self, index: int) -> StateVector:
        """Presentation form of one branch."""
        return StateVector(self.local_states[index]).normalize()

    def reconstruct(self) -> np.ndarray:
        return self.local_states.sum(axis=0)


def local_states(cut: CutSpec, psi: StateVector) -> LocalDecomposition:
    """
    Decompose the global state along the cut.

    :param cut: effects defining the local states
    :param psi: normalized global state
    :return: LocalDecomposition with unnormalized branches and their probabilities
    """
    if psi.basis_dim != cut.povm.dim:
        raise InvalidInputError(f"state dim {psi.basis_dim} vs cut dim {cut.povm.dim}")
    if not psi.is_normalized(ALGEBRAIC_TOL):
        raise InvalidInputError(f"local states need a normalized global state, norm = {psi.norm():.15f}")
    branches = cut.stacked @ psi.amplitudes
    probs = np.clip(np.einsum("d,kd->k", psi.amplitudes.conj(), branches).real, 0.0, None)
    gaps = np.abs(probs[:, None] - probs[None, :])
    np.fill_diagonal(gaps, np.inf)
    degenerate = bool(probs.size > 1 and np.min(gaps) < cut.degenerate_tol)
    return LocalDecomposition(branches, probs, degenerate)
