"""
hyperion/rotor.py

Behavior:
    - Split-step spectral evolution of the quantum rotor: half kinetic step
      diagonal in m, potential step diagonal on the 2M + 1 point angle grid,
      half kinetic step. The orbit is sampled at every mid-step time once,
      before the loop.
    - The wavefunction's own hbar is used; params.hbar_eff only seeds states.
    - A step that pushes probability past 0.9 M above 1e-6 stops the run
      with TruncationError.
    - rotor_observables: circular mean angle, mean momentum and the circular
      spread of the Husimi x-marginal.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import fft

from quantum.qcore import InvalidInputError, TruncationError

from .constants import EVOLUTION_TAIL_MAX, TAIL_FRACTION, TWO_PI
from .orbit import RotorParams, tidal_drive
from .phase_space import RotorWavefunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RotorObservables:
    x_mean: float
    p_mean: float
    spread: float

    def as_row(self):
        return [self.x_mean, self.p_mean, self.spread]


def rotor_observables(psi: RotorWavefunction) -> RotorObservables:
    """
    <x> as the circular mean of |psi(phi)|^2, <p> = hbar sum m |c_m|^2, and the
    circular standard deviation of the Husimi x-marginal.
    """
    c = psi.coefficients
    first_moment = np.sum(c[:-1] * np.conj(c[1:]))
    weight = np.abs(c) ** 2
    resultant = min(abs(first_moment) * math.exp(-0.5 * psi.delta_x ** 2), 1.0)
    spread = math.inf if resultant <= 0.0 else math.sqrt(max(-2.0 * math.log(resultant), 0.0))
    return RotorObservables(
        x_mean=float(np.angle(first_moment)) % TWO_PI,
        p_mean=float(psi.hbar * np.sum(psi.m * weight) / np.sum(weight)),
        spread=spread,
    )


class RotorPropagator:
    """
    Precomputed phases for ``n_steps`` steps of length ``dt`` from ``t0``.

    :param params: rotor and orbit parameters
    :param M: truncation of the wavefunctions it will advance
    :param hbar: effective hbar of those wavefunctions
    """

    def __init__(self, params: RotorParams, M: int, hbar: float, t0: float, dt: float, n_steps: int):
        if not (dt > 0.0 and math.isfinite(dt)):
            raise InvalidInputError(f"dt must be positive and finite, got {dt}")
        if n_steps < 0:
            raise InvalidInputError(f"n_steps must be non-negative, got {n_steps}")
        self.params = params
        self.M = M
        self.hbar = hbar
        self.t0 = t0
        self.dt = dt
        self.n_steps = n_steps
        m = np.arange(-M, M + 1)
        self._outside = np.abs(m) > TAIL_FRACTION * M
        self._energy = (m * hbar) ** 2 / (2.0 * params.inertia)
        self._half_kinetic = np.exp(-0.5j * self._energy * dt / hbar)
        self._full_kinetic = self._half_kinetic ** 2
        self.free = params.asymmetry == 0.0
        if not self.free:
            n_points = 2 * M + 1
            self._phi = TWO_PI * np.arange(n_points) / n_points
            mid_times = t0 + dt * (np.arange(n_steps) + 0.5)
            f3, theta = tidal_drive(params, mid_times)
            self._strength = 0.5 * params.torque_scale * f3 * dt / hbar
            self._theta = theta

    def _potential_phase(self, i: int) -> np.ndarray:
        """exp(-i V dt / hbar) on the angle grid, V = -(torque_scale / 2)(a/r)^3 cos 2(phi - theta)."""
        return np.exp(1j * self._strength[i] * np.cos(2.0 * (self._phi - self._theta[i])))

    def _check_tail(self, coeffs: np.ndarray, step: int) -> None:
        tail = float(np.sum(np.abs(coeffs[self._outside]) ** 2))
        if tail > EVOLUTION_TAIL_MAX:
            raise TruncationError(
                f"rotor tail mass {tail:.2e} beyond 0.9 M after step {step}; increase the truncation M = {self.M}",
                M=self.M, step=step, tail=tail,
            )

    def advance(self, coeffs: np.ndarray, start: int, count: int) -> np.ndarray:
        """Apply steps start .. start + count - 1 to the amplitudes c_m."""
        if start < 0 or start + count > self.n_steps:
            raise InvalidInputError(f"steps [{start}, {start + count}) outside the prepared {self.n_steps}")
        if count == 0:
            return coeffs
        if self.free:
            return coeffs * np.exp(-1j * self._energy * count * self.dt / self.hbar)
        n_points = coeffs.size
        c = coeffs * self._half_kinetic
        for i in range(start, start + count):
            values = n_points * fft.ifft(fft.ifftshift(c))
            values *= self._potential_phase(i)
            c = fft.fftshift(fft.fft(values)) / n_points
            c *= self._half_kinetic if i == start + count - 1 else self._full_kinetic
            self._check_tail(c, i + 1)
        return c


def evolve_rotor(psi: RotorWavefunction, params: RotorParams, t0: float, dt: float, n_steps: int) -> RotorWavefunction:
    """
    Evolve the rotor wavefunction for ``n_steps`` split steps.

    :raises TruncationError: when the tail mass beyond 0.9 M exceeds 1e-6
    """
    propagator = RotorPropagator(params, psi.M, psi.hbar, t0, dt, n_steps)
    return psi.replace(propagator.advance(psi.coefficients, 0, n_steps))


@dataclass
class RotorSeries:
    times: np.ndarray
    x_mean: np.ndarray
    p_mean: np.ndarray
    spread: np.ndarray
    final: RotorWavefunction
    stopped_early: bool = False

    def csv_rows(self):
        rows = [[float(t), float(x), float(p), float(s)]
                for t, x, p, s in zip(self.times, self.x_mean, self.p_mean, self.spread)]
        return ["t", "x_mean", "p_mean", "spread"], rows


def rotor_history(psi: RotorWavefunction, params: RotorParams, t0: float, dt: float, n_steps: int,
                  sample_every: int = 1,
                  stop: Optional[Callable[[int, RotorObservables], bool]] = None) -> RotorSeries:
    """
    Evolve and sample rotor_observables every ``sample_every`` steps.

    :param stop: called with (step, observables) at each sample; True ends the run
    :return: RotorSeries including the initial sample at t0
    """
    if sample_every < 1:
        raise InvalidInputError(f"sample_every must be at least 1, got {sample_every}")
    propagator = RotorPropagator(params, psi.M, psi.hbar, t0, dt, n_steps)
    coeffs = psi.coefficients
    first = rotor_observables(psi)
    steps, rows = [0], [first.as_row()]
    stopped = stop is not None and stop(0, first)
    done = 0
    while done < n_steps and not stopped:
        count = min(sample_every, n_steps - done)
        coeffs = propagator.advance(coeffs, done, count)
        done += count
        obs = rotor_observables(psi.replace(coeffs))
        steps.append(done)
        rows.append(obs.as_row())
        stopped = stop is not None and stop(done, obs)
    table = np.asarray(rows)
    if stopped and done < n_steps:
        logger.debug("Hyperion Rotor: stopped after %d of %d steps", done, n_steps)
    return RotorSeries(t0 + dt * np.asarray(steps, dtype=float), table[:, 0], table[:, 1], table[:, 2],
                       psi.replace(coeffs), stopped and done < n_steps)
