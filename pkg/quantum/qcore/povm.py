"""
qcore/povm.py

Behavior:
    - PovmSet holds either effects {Pi_i} or measurement (Kraus) operators {Omega_i}.
    - check_povm reports completeness, positivity, projectivity and pairwise
      commutator residuals without raising; callers decide what is fatal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .constants import ALGEBRAIC_TOL, NEGATIVE_PROB_TOL, POSITIVITY_PROBES
from .errors import InvalidInputError
from .linalg import OperatorMatrix, random_state


class PovmKind(str, Enum):
    EFFECTS = "effects"
    KRAUS = "kraus"


@dataclass(frozen=True)
class PovmSet:
    elements: Tuple[OperatorMatrix, ...]
    kind: PovmKind = PovmKind.EFFECTS
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        elements = tuple(self.elements)
        if not elements:
            raise InvalidInputError("a POVM needs at least one element")
        dims = {op.dim for op in elements}
        if len(dims) != 1:
            raise InvalidInputError(f"POVM elements have mismatched dimensions {sorted(dims)}")
        if self.labels is not None and len(self.labels) != len(elements):
            raise InvalidInputError(f"{len(self.labels)} labels for {len(elements)} POVM elements")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "kind", PovmKind(self.kind))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    def label(self, index: int) -> str:
        return self.labels[index] if self.labels is not None else str(index)

    def effects(self) -> List[np.ndarray]:
        """Effect matrices: Pi_i itself, or Omega_i^dagger Omega_i for Kraus sets."""
        if self.kind is PovmKind.EFFECTS:
            return [op.entries for op in self.elements]
        return [op.entries.conj().T @ op.entries for op in self.elements]

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray], kind: PovmKind = PovmKind.EFFECTS,
                    labels: Optional[Sequence[str]] = None) -> "PovmSet":
        hermitian = PovmKind(kind) is PovmKind.EFFECTS
        return cls(tuple(OperatorMatrix(np.asarray(a), hermitian=hermitian) for a in arrays),
                   kind, tuple(labels) if labels is not None else None)


@dataclass
class ValidationReport:
    completeness_residual: float
    positivity_violations: List[int] = field(default_factory=list)
    min_probe_expectation: float = 0.0
    projectivity_residuals: List[float] = field(default_factory=list)
    commutator_norms: Optional[np.ndarray] = None
    tol: float = ALGEBRAIC_TOL

    @property
    def is_complete(self) -> bool:
        return self.completeness_residual <= self.tol

    @property
    def is_positive(self) -> bool:
        return not self.positivity_violations

    @property
    def is_projective(self) -> bool:
        return all(r <= self.tol for r in self.projectivity_residuals)

    @property
    def passed(self) -> bool:
        return self.is_complete and self.is_positive

    @property
    def max_commutator(self) -> float:
        if self.commutator_norms is None or self.commutator_norms.size == 0:
            return 0.0
        return float(np.max(self.commutator_norms))

    def to_dict(self) -> dict:
        return {
            "completeness_residual": self.completeness_residual,
            "positivity_violations": list(self.positivity_violations),
            "min_probe_expectation": self.min_probe_expectation,
            "projectivity_residuals": list(self.projectivity_residuals),
            "max_commutator": self.max_commutator,
            "passed": self.passed,
            "projective": self.is_projective,
        }


def check_povm(povm: PovmSet, tol: float = ALGEBRAIC_TOL, probes: int = POSITIVITY_PROBES,
               seed: int = 0, pairwise: bool = True) -> ValidationReport:
    """
    Validate a measurement set.

    :param povm: effects or Kraus operators
    :param tol: completeness / projectivity tolerance
    :param probes: number of random probe states for the positivity check
    :param seed: seed of the probe generator (the check is deterministic)
    :param pairwise: compute the n x n commutator table (skip for large phase-space grids)
    :return: ValidationReport; nothing is raised for a failing set
    """
    effects = povm.effects()
    dim = povm.dim
    total = np.sum(effects, axis=0)
    completeness = float(np.max(np.abs(total - np.eye(dim))))

    probe_rng = np.random.default_rng(seed)
    probe_states = [random_state(dim, probe_rng).amplitudes for _ in range(probes)]
    violations = []
    min_expectation = np.inf
    for index, effect in enumerate(effects):
        herm = (effect + effect.conj().T) / 2.0
        lowest = float(np.linalg.eigvalsh(herm)[0])
        probe_min = min(float(np.real(np.vdot(v, effect @ v))) for v in probe_states)
        min_expectation = min(min_expectation, probe_min, lowest)
        if min(lowest, probe_min) < -NEGATIVE_PROB_TOL:
            violations.append(index)

    projectivity = [float(np.max(np.abs(e @ e - e))) for e in effects]

    n = len(effects)
    commutators = np.zeros((n, n))
    for i in range(n if pairwise else 0):
        for j in range(i + 1, n):
            c = effects[i] @ effects[j] - effects[j] @ effects[i]
            commutators[i, j] = commutators[j, i] = float(np.max(np.abs(c)))

    return ValidationReport(
        completeness_residual=completeness,
        positivity_violations=violations,
        min_probe_expectation=float(min_expectation),
        projectivity_residuals=projectivity,
        commutator_norms=commutators,
        tol=tol,
    )
