"""
hyperion/orbit.py

Behavior:
    - RotorParams: the spin-orbit model in units with I3 = 1, T = 2 pi, a = 1
      by default (any positive values are honored).
    - orbit(params, t) solves Kepler's equation by vectorized Newton iteration
      and returns the radius and the unwrapped true anomaly.
    - Named presets ("chaotic_demo", "regular_demo") are demonstration values
      picked with the Lyapunov diagnostic, not measured properties of Hyperion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, Tuple, Union

import numpy as np

from quantum.qcore import ConvergenceError, InvalidInputError

from .constants import KEPLER_MAX_ITER, KEPLER_TOL, TWO_PI


@dataclass(frozen=True)
class RotorParams:
    """
    :param asymmetry: (I2 - I1) / I3
    :param eccentricity: orbital eccentricity, 0 <= e < 1
    :param period: orbital period T
    :param semi_major: semi-major axis a
    :param inertia: I3
    :param hbar_eff: dimensionless effective hbar
    """

    asymmetry: float
    eccentricity: float
    period: float = TWO_PI
    semi_major: float = 1.0
    inertia: float = 1.0
    hbar_eff: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.eccentricity < 1.0:
            raise InvalidInputError(f"eccentricity must lie in [0, 1), got {self.eccentricity}")
        if self.asymmetry < 0.0:
            raise InvalidInputError(f"asymmetry must be non-negative, got {self.asymmetry}")
        for name in ("period", "semi_major", "inertia", "hbar_eff"):
            if getattr(self, name) <= 0.0:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def mean_motion(self) -> float:
        return TWO_PI / self.period

    @property
    def torque_scale(self) -> float:
        """(3/2) I3 n^2 asymmetry; dl/dt = -torque_scale (a/r)^3 sin 2(phi - theta)."""
        return 1.5 * self.inertia * self.mean_motion ** 2 * self.asymmetry

    def with_hbar(self, hbar_eff: float) -> "RotorParams":
        return replace(self, hbar_eff=hbar_eff)


PRESETS: Dict[str, dict] = {
    "chaotic_demo": {
        "params": RotorParams(asymmetry=0.26, eccentricity=0.1),
        "initial_conditions": ((0.3, 1.6), (1.2, 1.1)),
    },
    "regular_demo": {
        "params": RotorParams(asymmetry=0.02, eccentricity=0.0),
        "initial_conditions": ((0.3, 1.0), (1.2, 1.05)),
    },
}


def preset(name: str) -> RotorParams:
    if name not in PRESETS:
        raise InvalidInputError(f"unknown rotor preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]["params"]


def solve_kepler(mean_anomaly: np.ndarray, eccentricity: float) -> np.ndarray:
    """
    Eccentric anomaly E with E - e sin E = M, by Newton iteration.

    M is reduced to [0, 2 pi) first and the whole turns are added back, so E
    is continuous in M and the residual test is not limited by |M|.

    :raises ConvergenceError: when the residual is above 1e-12 after 50 iterations
    """
    mean_anomaly = np.asarray(mean_anomaly, dtype=float)
    if eccentricity == 0.0:
        return mean_anomaly.copy()
    turns = np.floor(mean_anomaly / TWO_PI)
    reduced = mean_anomaly - TWO_PI * turns
    if eccentricity < 0.8:
        E = reduced + eccentricity * np.sin(reduced)
    else:
        E = np.full_like(reduced, np.pi)
    for _ in range(KEPLER_MAX_ITER):
        residual = E - eccentricity * np.sin(E) - reduced
        if np.max(np.abs(residual), initial=0.0) < KEPLER_TOL:
            return E + TWO_PI * turns
        E = E - residual / (1.0 - eccentricity * np.cos(E))
    residual = E - eccentricity * np.sin(E) - reduced
    worst = float(np.max(np.abs(residual), initial=0.0))
    if worst >= KEPLER_TOL:
        raise ConvergenceError(f"Kepler iteration did not converge, residual {worst:.3e}", residual=worst)
    return E + TWO_PI * turns


def orbit(params: RotorParams, t: Union[float, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Orbital radius and true anomaly at time(s) t; perihelion at t = 0.

    :return: (r, theta) with theta unwrapped (continuous in t)
    """
    e = params.eccentricity
    E = solve_kepler(params.mean_motion * np.asarray(t, dtype=float), e)
    r = params.semi_major * (1.0 - e * np.cos(E))
    beta = e / (1.0 + math.sqrt(1.0 - e * e))
    theta = E + 2.0 * np.arctan(beta * np.sin(E) / (1.0 - beta * np.cos(E)))
    return r, theta


def kepler_residual(params: RotorParams, t: np.ndarray) -> float:
    """Largest |E - e sin E - M| over the sampled times, measured on the reduced anomaly."""
    M = params.mean_motion * np.asarray(t, dtype=float)
    E = solve_kepler(M, params.eccentricity)
    turns = np.floor(M / TWO_PI)
    residual = (E - TWO_PI * turns) - params.eccentricity * np.sin(E) - (M - TWO_PI * turns)
    return float(np.max(np.abs(residual), initial=0.0))


def tidal_drive(params: RotorParams, times: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(a/r)^3 and theta sampled at the given times, for the integrators."""
    r, theta = orbit(params, times)
    return (params.semi_major / r) ** 3, theta
