"""
modal/ergodicity.py

Behavior:
    - Summarizes jump paths: transition counts, which local states are reachable
      from which, transitions that cross sector boundaries, and the fraction of
      time spent in each local state with its standard error over paths.
    - stationary_distribution solves Q pi = 0 for a frozen rate matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import linalg as sla

from quantum.qcore import InvalidInputError

from .engine import ModalPath

logger = logging.getLogger(__name__)


@dataclass
class ErgodicityReport:
    labels: List[str]
    sectors: List[str]
    transition_counts: np.ndarray
    reachable: np.ndarray
    cross_sector_transitions: int
    occupation: np.ndarray
    occupation_stderr: Optional[np.ndarray]
    n_paths: int

    @property
    def visited(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.occupation > 0.0)]

    @property
    def is_ergodic(self) -> bool:
        """Every local state reaches every other along observed transitions."""
        return bool(np.all(self.reachable))

    def reachable_from(self, index: int) -> List[int]:
        return [int(j) for j in np.flatnonzero(self.reachable[index])]

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "sectors": list(self.sectors),
            "n_paths": self.n_paths,
            "transition_counts": self.transition_counts.tolist(),
            "reachable": {self.labels[i]: [self.labels[j] for j in self.reachable_from(i)]
                          for i in range(len(self.labels))},
            "cross_sector_transitions": self.cross_sector_transitions,
            "occupation": self.occupation.tolist(),
            "occupation_stderr": None if self.occupation_stderr is None else self.occupation_stderr.tolist(),
            "is_ergodic": self.is_ergodic,
        }


def _reachability(counts: np.ndarray) -> np.ndarray:
    """Transitive closure of the observed transition graph; every state reaches itself."""
    reach = (counts > 0) | np.eye(counts.shape[0], dtype=bool)
    for middle in range(counts.shape[0]):
        reach = reach | (reach[:, middle:middle + 1] & reach[middle:middle + 1, :])
    return reach


def ergodicity_report(paths: Sequence[ModalPath], labels: Sequence[str],
                      sectors: Optional[Sequence[str]] = None, burn_in: int = 0) -> ErgodicityReport:
    """
    Ergodicity diagnostics for a set of jump paths.

    A single path is accepted; its standard errors are reported as None.

    :param paths: paths over the same local states
    :param labels: local-state names, one per index
    :param sectors: sector name per local state; defaults to the labels themselves
    :param burn_in: grid points skipped before occupation fractions are accumulated
    """
    if not paths:
        raise InvalidInputError("ergodicity_report needs at least one path")
    k = len(labels)
    sectors = list(sectors) if sectors is not None else list(labels)
    if len(sectors) != k:
        raise InvalidInputError(f"{len(sectors)} sector names for {k} local states")

    counts = np.zeros((k, k), dtype=np.int64)
    for path in paths:
        if np.any(path.indices >= k) or np.any(path.indices < 0):
            raise InvalidInputError("path visits an index outside the label set")
        source, target = path.indices[:-1], path.indices[1:]
        moved = source != target
        np.add.at(counts, (source[moved], target[moved]), 1)

    sector_of = np.asarray(sectors, dtype=object)
    cross = int(sum(counts[i, j] for i in range(k) for j in range(k) if sector_of[i] != sector_of[j]))

    fractions = np.array([path.time_fractions(k, burn_in) for path in paths])
    occupation = fractions.mean(axis=0)
    stderr = fractions.std(axis=0, ddof=1) / np.sqrt(len(paths)) if len(paths) > 1 else None
    if cross:
        logger.info("Modal Ergodicity: %d cross-sector transitions over %d paths", cross, len(paths))
    return ErgodicityReport(list(labels), sectors, counts, _reachability(counts), cross,
                            occupation, stderr, len(paths))


def stationary_distribution(rates: np.ndarray) -> np.ndarray:
    """
    Stationary law of a frozen jump chain.

    :param rates: ``rates[j, i]`` for the jump i -> j
    :return: probability vector pi with Q pi = 0
    :raises InvalidInputError: when the chain has more than one stationary law
    """
    rates = np.asarray(rates, dtype=float)
    generator = rates - np.diag(rates.sum(axis=0))
    kernel = sla.null_space(generator)
    if kernel.shape[1] != 1:
        raise InvalidInputError(f"rate matrix has {kernel.shape[1]} stationary directions; chain is not irreducible")
    vector = kernel[:, 0]
    vector = vector / vector.sum()
    return np.clip(vector, 0.0, None) / np.clip(vector, 0.0, None).sum()
