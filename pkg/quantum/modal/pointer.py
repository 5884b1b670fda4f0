"""
modal/pointer.py

Behavior:
    - Two-outcome pointer-overlap model: the pointer states start identical and
      their overlap F(t) = exp[-(t/tau)^2] decays, so the local-state
      probabilities move from (1, 0) to the Born weights.
    - The model is run through the ordinary jump engine with an exact
      two-level stand-in: psi(t) = (cos theta, sin theta), sin^2 theta = p2(t),
      generated by H(t) = theta'(t) sigma_y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from quantum.qcore import InvalidInputError, OperatorMatrix, StateVector
from quantum.qcore.constants import ALGEBRAIC_TOL

from .constants import DEGENERACY_NUDGE, DEGENERATE_TOL
from .cut import CutSpec

SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])


def _second_probability(weight_product: float, one_minus_f: float) -> float:
    # p2 = (1 - sqrt(1 - x)) / 2 written without cancellation
    x = 4.0 * weight_product * one_minus_f ** 2
    return x / (2.0 * (1.0 + math.sqrt(max(0.0, 1.0 - x))))


def pointer_overlap_probs(c1: complex, c2: complex, F: float) -> Tuple[float, float]:
    """
    Local-state probabilities for pointer overlap F.

    Outcome 1 is the branch connected to the initial pointer state; it ends at
    max(|c1|^2, |c2|^2) when F reaches 0.

    :param c1: amplitude of the first branch
    :param c2: amplitude of the second branch
    :param F: pointer-state overlap in [0, 1]
    :return: (p1, p2) with p1 + p2 = 1
    """
    if not 0.0 <= F <= 1.0:
        raise InvalidInputError(f"pointer overlap must lie in [0, 1], got {F}")
    a, b = abs(c1) ** 2, abs(c2) ** 2
    if abs(a + b - 1.0) > ALGEBRAIC_TOL:
        raise InvalidInputError(f"|c1|^2 + |c2|^2 = {a + b:.12f}, expected 1")
    p2 = _second_probability(a * b, 1.0 - F)
    return 1.0 - p2, p2


@dataclass(frozen=True)
class PointerOverlapModel:
    """
    :param c1: first branch amplitude
    :param c2: second branch amplitude
    :param tau: pointer decoherence time
    """

    c1: complex
    c2: complex
    tau: float

    def __post_init__(self):
        if self.tau <= 0.0:
            raise InvalidInputError(f"tau must be positive, got {self.tau}")
        pointer_overlap_probs(self.c1, self.c2, 1.0)

    @property
    def weights(self) -> Tuple[float, float]:
        return abs(self.c1) ** 2, abs(self.c2) ** 2

    @property
    def degenerate(self) -> bool:
        a, b = self.weights
        return abs(a - b) < DEGENERATE_TOL

    @property
    def limits(self) -> Tuple[float, float]:
        a, b = self.weights
        return max(a, b), min(a, b)

    def one_minus_overlap(self, t: float) -> float:
        value = -math.expm1(-(t / self.tau) ** 2)
        if self.degenerate:
            value = max(0.0, value - DEGENERACY_NUDGE)
        return value

    def overlap(self, t: float) -> float:
        return 1.0 - self.one_minus_overlap(t)

    def probs(self, t: float) -> Tuple[float, float]:
        a, b = self.weights
        p2 = _second_probability(a * b, self.one_minus_overlap(t))
        return 1.0 - p2, p2

    def p2_rate(self, t: float) -> float:
        """dp2/dt = 2ab(1 - F) F' / sqrt(1 - x), F' = -2t/tau^2 F."""
        a, b = self.weights
        g = self.one_minus_overlap(t)
        x = 4.0 * a * b * g ** 2
        if x >= 1.0:
            return 0.0
        f_dot = -2.0 * t / self.tau ** 2 * (1.0 - g)
        return -2.0 * a * b * g * f_dot / math.sqrt(1.0 - x)

    def theta_rate(self, t: float) -> float:
        p1, p2 = self.probs(t)
        if p2 <= 0.0 or p1 <= 0.0:
            return 0.0
        return self.p2_rate(t) / (2.0 * math.sqrt(p1 * p2))

    def hamiltonian(self, t: float) -> OperatorMatrix:
        return OperatorMatrix(self.theta_rate(t) * SIGMA_Y, hermitian=True, name="pointer_generator")

    def initial_state(self) -> StateVector:
        return StateVector.from_coefficients([1.0, 0.0], ("M1", "M2"))

    def exact_state(self, t: float) -> StateVector:
        p1, p2 = self.probs(t)
        return StateVector.from_coefficients([math.sqrt(p1), math.sqrt(p2)], ("M1", "M2"))

    def cut(self) -> CutSpec:
        return CutSpec.from_blocks((1, 1), ("M1", "M2"))
