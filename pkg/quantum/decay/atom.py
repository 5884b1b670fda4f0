"""
decay/atom.py

Behavior:
    - Decay rate of a two-level atom coupled to a field that disperses the
      emitted photon quickly: gamma = lambda^2 tau / (2 hbar^2).
    - Arrival-time probabilities for a detector that reads out in windows eta.
    - Memory-kernel check: the amplitude equation
      f'(t) = -(lambda^2 / hbar^2) int_0^t q(t - s) f(s) ds with q a narrow
      Gaussian of weight tau is integrated numerically and compared with
      exp(-gamma t).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import erf

from quantum.qcore import InvalidInputError

from .constants import GAMMA_ETA_MAX, KERNEL_CUTOFF_WIDTHS, KERNEL_WIDTH_FRACTION

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AtomFieldParams:
    """
    :param lambda_coupling: atom-field coupling
    :param tau_dispersal: dispersal time of the emitted photon
    :param omega: transition frequency (E1 - E0) / hbar
    :param eta: detector window
    :param hbar: reduced Planck constant in the chosen units
    """

    lambda_coupling: float
    tau_dispersal: float
    omega: float = 0.0
    eta: float = 0.01
    hbar: float = 1.0

    def __post_init__(self):
        if self.lambda_coupling < 0.0:
            raise InvalidInputError(f"coupling must be non-negative, got {self.lambda_coupling}")
        for name in ("tau_dispersal", "eta", "hbar"):
            if getattr(self, name) <= 0.0:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)}")
        if self.gamma * self.eta >= GAMMA_ETA_MAX:
            raise InvalidInputError(
                f"gamma * eta = {self.gamma * self.eta:.4g} is outside the small-window regime (< {GAMMA_ETA_MAX})"
            )

    @property
    def gamma(self) -> float:
        return self.lambda_coupling ** 2 * self.tau_dispersal / (2.0 * self.hbar ** 2)


def decay_rate(params: AtomFieldParams) -> float:
    """gamma = lambda^2 tau / (2 hbar^2); the excited population decays as exp(-2 gamma t)."""
    return params.gamma


def _check_window(gamma: float, eta: float) -> None:
    if gamma < 0.0 or eta <= 0.0:
        raise InvalidInputError(f"need gamma >= 0 and eta > 0, got gamma={gamma}, eta={eta}")
    if gamma * eta >= GAMMA_ETA_MAX:
        raise InvalidInputError(f"gamma * eta = {gamma * eta:.4g} must stay below {GAMMA_ETA_MAX}")


def arrival_probs(gamma: float, eta: float, n_windows: int) -> np.ndarray:
    """
    Detector outcome probabilities after n windows.

    :return: array [p0, p1, ..., pn]; p0 = exp(-2 gamma n eta) is the
        no-arrival probability and p_j = 2 gamma eta exp(-2 gamma j eta)
    """
    _check_window(gamma, eta)
    if n_windows < 0:
        raise InvalidInputError(f"n_windows must be non-negative, got {n_windows}")
    j = np.arange(1, n_windows + 1)
    probs = np.empty(n_windows + 1)
    probs[0] = math.exp(-2.0 * gamma * n_windows * eta)
    probs[1:] = 2.0 * gamma * eta * np.exp(-2.0 * gamma * j * eta)
    return probs


def kernel_moments(sigma: float, lower: np.ndarray, upper: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Zeroth and first moments of the unit-weight Gaussian of width sigma over [lower, upper].

    :return: (int g ds, int s g ds)
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    scale = sigma * math.sqrt(2.0)
    mass = 0.5 * (erf(upper / scale) - erf(lower / scale))
    first = sigma / math.sqrt(2.0 * math.pi) * (np.exp(-(lower / scale) ** 2) - np.exp(-(upper / scale) ** 2))
    return mass, first


@dataclass
class KernelSolution:
    times: np.ndarray
    amplitude: np.ndarray
    gamma: float

    def max_deviation(self) -> float:
        """Largest |f(t) - exp(-gamma t)| on the grid."""
        return float(np.max(np.abs(self.amplitude - np.exp(-self.gamma * self.times))))


def solve_memory_kernel(params: AtomFieldParams, t_max: float, step: float,
                        width_fraction: float = KERNEL_WIDTH_FRACTION) -> KernelSolution:
    """
    Integrate the amplitude equation with a Gaussian kernel q = tau g_sigma.

    f is taken piecewise linear between grid points and the kernel is integrated
    against it exactly, so the step only has to resolve the decay, not the
    kernel. Time stepping is the implicit trapezoid rule.

    :param params: coupling, dispersal time and hbar
    :param t_max: end of the time grid
    :param step: grid spacing
    :param width_fraction: kernel width sigma as a fraction of tau
    """
    if step <= 0.0 or t_max <= 0.0:
        raise InvalidInputError(f"need positive t_max and step, got {t_max}, {step}")
    sigma = width_fraction * params.tau_dispersal
    strength = (params.lambda_coupling / params.hbar) ** 2
    n_steps = int(round(t_max / step))
    span = min(n_steps, int(math.ceil(KERNEL_CUTOFF_WIDTHS * sigma / step)) + 1)

    starts = step * np.arange(span)
    mass, first = kernel_moments(sigma, starts, starts + step)
    mass = params.tau_dispersal * mass
    # int q(s) (s - s_k) ds over cell k
    offset = params.tau_dispersal * first - starts * mass
    weight_now = mass - offset / step
    weight_prev = offset / step

    f = np.empty(n_steps + 1)
    f[0] = 1.0
    memory = np.zeros(n_steps + 1)
    for n in range(1, n_steps + 1):
        cells = min(n, span)
        k = np.arange(cells)
        rest = float(np.dot(weight_now[1:cells], f[n - k[1:]]) + np.dot(weight_prev[:cells], f[n - k - 1]))
        half = 0.5 * step * strength
        f[n] = (f[n - 1] - half * (memory[n - 1] + rest)) / (1.0 + half * weight_now[0])
        memory[n] = weight_now[0] * f[n] + rest
    times = step * np.arange(n_steps + 1)
    solution = KernelSolution(times, f, params.gamma)
    logger.debug("Decay Kernel: %d steps, sigma %.3g, max deviation %.3e", n_steps, sigma, solution.max_deviation())
    return solution
