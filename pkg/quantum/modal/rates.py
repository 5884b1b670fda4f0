"""
modal/rates.py

Behavior:
    - Bell transition rates between local states,
      T_ji = 2 max(Im<Psi_j|H|Psi_i> / p_i, 0)  (hbar = 1).
    - The current J_ji = Im<Psi_j|H|Psi_i> is antisymmetrized before use, so
      at most one of T_ij, T_ji is nonzero for every pair.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from quantum.qcore import InvalidInputError, OperatorMatrix

from .constants import OCCUPATION_FLOOR
from .cut import LocalDecomposition

logger = logging.getLogger(__name__)


@dataclass
class RateMatrix:
    """``rates[j, i]`` is the rate of the jump i -> j."""

    rates: np.ndarray
    currents: np.ndarray
    flagged: List[int] = field(default_factory=list)

    def exit_rate(self, i: int) -> float:
        return float(self.rates[:, i].sum())

    def generator(self) -> np.ndarray:
        """Q with dp/dt = Q p for the frozen rates."""
        return self.rates - np.diag(self.rates.sum(axis=0))


def probability_currents(H: OperatorMatrix, decomp: LocalDecomposition) -> np.ndarray:
    """Antisymmetric J with J[j, i] = Im<Psi_j|H|Psi_i>; dp_i/dt = 2 sum_j J[i, j]."""
    branches = decomp.local_states
    if branches.shape[1] != H.dim:
        raise InvalidInputError(f"Hamiltonian dim {H.dim} vs local state dim {branches.shape[1]}")
    gram = branches.conj() @ (H.entries @ branches.T)
    imag = gram.imag
    return (imag - imag.T) / 2.0


def bell_rates(H: OperatorMatrix, decomp: LocalDecomposition) -> RateMatrix:
    """
    Transition rates of the jump process for a frozen decomposition.

    :param H: hermitian Hamiltonian
    :param decomp: local states at the same instant
    :return: RateMatrix; exits from states with p_i < 1e-14 are zeroed and flagged
    """
    if np.any(decomp.probs < 0.0):
        raise InvalidInputError("local-state probabilities must be non-negative")
    currents = probability_currents(H, decomp)
    occupied = decomp.probs >= OCCUPATION_FLOOR
    flagged = [int(i) for i in np.flatnonzero(~occupied)]
    positive = 2.0 * np.clip(currents, 0.0, None)
    safe_p = np.where(occupied, decomp.probs, 1.0)
    rates = np.where(occupied[None, :], positive / safe_p[None, :], 0.0)
    np.fill_diagonal(rates, 0.0)
    if flagged:
        logger.debug("Bell Rates: zeroed exits from near-empty local states %s", flagged)
    return RateMatrix(rates, currents, flagged)


def schrodinger_flow(H: OperatorMatrix, decomp: LocalDecomposition) -> np.ndarray:
    """dp_i/dt = 2 sum_j Im<Psi_i|H|Psi_j> from the Schrodinger equation."""
    return 2.0 * probability_currents(H, decomp).sum(axis=1)
