"""
hyperion/classical.py

Behavior:
    - Fixed-step RK4 for dphi/dt = l / I3, dl/dt = -(3/2) I3 n^2 asym (a/r)^3 sin 2(phi - theta).
      The orbit is sampled once at every stage time before the loop runs.
    - lyapunov: tangent vector propagated with the linearized equations and
      renormalized every few steps; lambda is the mean log stretch rate.
    - divergence_rate: the same estimate from two nearby trajectories.
    - tangent_area: determinant of two unrenormalized tangent vectors (stays 1).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from quantum.qcore import IntegrationError, InvalidInputError

from .constants import DIVERGENCE_SEPARATION, MIN_STEPS_PER_ORBIT, RENORM_EVERY, TWO_PI
from .orbit import RotorParams, tidal_drive

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassicalRotorState:
    phi: float
    ell: float

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.ell)):
            raise InvalidInputError(f"rotor state must be finite, got ({self.phi}, {self.ell})")
        object.__setattr__(self, "phi", self.phi % TWO_PI)


@dataclass
class ClassicalTrajectory:
    times: np.ndarray
    phi: np.ndarray
    ell: np.ndarray

    @property
    def final(self) -> ClassicalRotorState:
        return ClassicalRotorState(float(self.phi[-1]), float(self.ell[-1]))

    def state(self, index: int) -> ClassicalRotorState:
        return ClassicalRotorState(float(self.phi[index]), float(self.ell[index]))

    def csv_rows(self):
        return ["t", "phi", "ell"], [[float(t), float(p % TWO_PI), float(l)]
                                     for t, p, l in zip(self.times, self.phi, self.ell)]


def hamiltonian(params: RotorParams, phi, ell, t):
    """l^2 / 2 I3 - (3/4) I3 n^2 asym (a/r)^3 cos 2(phi - theta)."""
    f3, theta = tidal_drive(params, np.asarray(t, dtype=float))
    return np.asarray(ell) ** 2 / (2.0 * params.inertia) - 0.5 * params.torque_scale * f3 * np.cos(2.0 * (np.asarray(phi) - theta))


def corotating_integral(params: RotorParams, phi, ell, t):
    """Conserved K = H - n l of the circular orbit."""
    if params.eccentricity != 0.0:
        raise InvalidInputError("the co-rotating integral exists only for a circular orbit")
    return hamiltonian(params, phi, ell, t) - params.mean_motion * np.asarray(ell)


class _Drive:
    """Orbit samples at t0 + k h / 2 for k = 0 .. 2 n."""

    def __init__(self, params: RotorParams, t0: float, h: float, n_steps: int):
        stage_times = t0 + 0.5 * h * np.arange(2 * n_steps + 1)
        f3, theta = tidal_drive(params, stage_times)
        self.torque = (params.torque_scale * f3).tolist()
        self.theta = theta.tolist()
        self.inv_inertia = 1.0 / params.inertia
        self.h = h

    def force(self, phi: float, k: int) -> float:
        return -self.torque[k] * math.sin(2.0 * (phi - self.theta[k]))

    def stiffness(self, phi: float, k: int) -> float:
        """d(force)/d(phi)."""
        return -2.0 * self.torque[k] * math.cos(2.0 * (phi - self.theta[k]))

    def step(self, i: int, phi: float, ell: float, tangents: Optional[List[List[float]]] = None) -> Tuple[float, float]:
        h, w = self.h, self.inv_inertia
        k0, k1, k2 = 2 * i, 2 * i + 1, 2 * i + 2
        a_phi, a_ell = ell * w, self.force(phi, k0)
        p2 = phi + 0.5 * h * a_phi
        b_phi, b_ell = (ell + 0.5 * h * a_ell) * w, self.force(p2, k1)
        p3 = phi + 0.5 * h * b_phi
        c_phi, c_ell = (ell + 0.5 * h * b_ell) * w, self.force(p3, k1)
        p4 = phi + h * c_phi
        d_phi, d_ell = (ell + h * c_ell) * w, self.force(p4, k2)
        if tangents:
            s1, s2, s3, s4 = self.stiffness(phi, k0), self.stiffness(p2, k1), self.stiffness(p3, k1), self.stiffness(p4, k2)
            for vector in tangents:
                dp, dl = vector
                ap, al = dl * w, s1 * dp
                bp, bl = (dl + 0.5 * h * al) * w, s2 * (dp + 0.5 * h * ap)
                cp, cl = (dl + 0.5 * h * bl) * w, s3 * (dp + 0.5 * h * bp)
                ep, el = (dl + h * cl) * w, s4 * (dp + h * cp)
                vector[0] = dp + h * (ap + 2.0 * bp + 2.0 * cp + ep) / 6.0
                vector[1] = dl + h * (al + 2.0 * bl + 2.0 * cl + el) / 6.0
        phi = phi + h * (a_phi + 2.0 * b_phi + 2.0 * c_phi + d_phi) / 6.0
        ell = ell + h * (a_ell + 2.0 * b_ell + 2.0 * c_ell + d_ell) / 6.0
        return phi, ell


def _steps_for(params: RotorParams, span: float, dt: float) -> Tuple[int, float]:
    """Number of steps and the (possibly shortened) step that covers ``span`` exactly."""
    if dt <= 0.0 or not math.isfinite(dt):
        raise InvalidInputError(f"dt must be positive and finite, got {dt}")
    if dt > params.period / MIN_STEPS_PER_ORBIT * (1.0 + 1e-9):
        raise InvalidInputError(f"dt = {dt:.4g} does not resolve the libration; need dt <= T/{MIN_STEPS_PER_ORBIT}")
    if span == 0.0 or not math.isfinite(span):
        raise InvalidInputError(f"integration span must be finite and nonzero, got {span}")
    n = max(1, int(math.ceil(abs(span) / dt - 1e-9)))
    return n, span / n


def integrate_classical(params: RotorParams, state0: ClassicalRotorState, t_span: Tuple[float, float],
                        dt: Optional[float] = None) -> ClassicalTrajectory:
    """
    Fixed-step RK4 trajectory of the rotor.

    :param params: rotor and orbit parameters
    :param state0: initial (phi, l)
    :param t_span: (t0, t1); t1 < t0 integrates backwards
    :param dt: positive step, at most T/500; defaults to T/500
    :raises IntegrationError: on NaN or inf in the state
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    dt = params.period / MIN_STEPS_PER_ORBIT if dt is None else dt
    n, h = _steps_for(params, t1 - t0, dt)
    drive = _Drive(params, t0, h, n)
    phi, ell = state0.phi, state0.ell
    phis = np.empty(n + 1)
    ells = np.empty(n + 1)
    phis[0], ells[0] = phi, ell
    for i in range(n):
        phi, ell = drive.step(i, phi, ell)
        phis[i + 1], ells[i + 1] = phi, ell
    if not (np.all(np.isfinite(phis)) and np.all(np.isfinite(ells))):
        raise IntegrationError("classical rotor integration produced NaN/inf", t0=t0, t1=t1)
    return ClassicalTrajectory(t0 + h * np.arange(n + 1), phis, ells)


@dataclass
class LyapunovResult:
    lambda_max: float
    t_c: float
    regular: bool
    duration: float
    running: np.ndarray

    def to_dict(self) -> dict:
        return {
            "lambda_max": self.lambda_max,
            "t_c": None if math.isinf(self.t_c) else self.t_c,
            "regular": self.regular,
            "duration": self.duration,
        }


def lyapunov(params: RotorParams, state0: ClassicalRotorState, duration: float, dt: Optional[float] = None,
             renorm_every: int = RENORM_EVERY, regular_below: Optional[float] = None) -> LyapunovResult:
    """
    Largest Lyapunov exponent by tangent-space propagation.

    :param duration: integration time, ideally at least 50 chaos times
    :param regular_below: exponents under this are reported as regular;
        defaults to 1e-3 of the mean motion
    :return: LyapunovResult; t_c = 1 / lambda, inf for regular motion
    """
    dt = params.period / MIN_STEPS_PER_ORBIT if dt is None else dt
    if duration <= 0.0:
        raise InvalidInputError(f"duration must be positive, got {duration}")
    n, dt = _steps_for(params, duration, dt)
    drive = _Drive(params, 0.0, dt, n)
    phi, ell = state0.phi, state0.ell
    tangent = [1.0, 0.0]
    log_stretch = 0.0
    running = []
    for i in range(n):
        phi, ell = drive.step(i, phi, ell, [tangent])
        if (i + 1) % renorm_every == 0 or i == n - 1:
            size = math.hypot(tangent[0], tangent[1])
            if not (math.isfinite(size) and math.isfinite(phi) and math.isfinite(ell)) or size == 0.0:
                raise IntegrationError(f"tangent propagation blew up at t = {(i + 1) * dt:.4g}")
            log_stretch += math.log(size)
            tangent[0] /= size
            tangent[1] /= size
            running.append(log_stretch / ((i + 1) * dt))
    lam = log_stretch / (n * dt)
    threshold = 1e-3 * params.mean_motion if regular_below is None else regular_below
    regular = lam < threshold
    if regular:
        logger.info("Hyperion Classical: lambda = %.3e below %.1e, motion reported as regular", lam, threshold)
    return LyapunovResult(lam, math.inf if regular else 1.0 / lam, regular, n * dt, np.asarray(running))


def divergence_rate(params: RotorParams, state0: ClassicalRotorState, duration: float, dt: Optional[float] = None,
                    separation: float = DIVERGENCE_SEPARATION, renorm_every: int = RENORM_EVERY) -> float:
    """Two-trajectory estimate of lambda: a neighbour is pulled back to ``separation`` every few steps."""
    dt = params.period / MIN_STEPS_PER_ORBIT if dt is None else dt
    if duration <= 0.0:
        raise InvalidInputError(f"duration must be positive, got {duration}")
    n, dt = _steps_for(params, duration, dt)
    drive = _Drive(params, 0.0, dt, n)
    phi, ell = state0.phi, state0.ell
    phi2, ell2 = phi + separation, ell
    log_stretch = 0.0
    for i in range(n):
        phi, ell = drive.step(i, phi, ell)
        phi2, ell2 = drive.step(i, phi2, ell2)
        if (i + 1) % renorm_every == 0 or i == n - 1:
            d_phi, d_ell = phi2 - phi, ell2 - ell
            distance = math.hypot(d_phi, d_ell)
            if not math.isfinite(distance) or distance == 0.0:
                raise IntegrationError(f"trajectory pair blew up at t = {(i + 1) * dt:.4g}")
            log_stretch += math.log(distance / separation)
            scale = separation / distance
            phi2, ell2 = phi + d_phi * scale, ell + d_ell * scale
    return log_stretch / (n * dt)


def tangent_area(params: RotorParams, state0: ClassicalRotorState, orbits: int, dt: Optional[float] = None) -> np.ndarray:
    """
    Area spanned by two tangent vectors, started as the unit square, after each orbit.

    :return: determinants, one per completed orbit
    """
    dt = params.period / MIN_STEPS_PER_ORBIT if dt is None else dt
    per_orbit, dt = _steps_for(params, params.period, dt)
    drive = _Drive(params, 0.0, dt, per_orbit * orbits)
    phi, ell = state0.phi, state0.ell
    vectors = [[1.0, 0.0], [0.0, 1.0]]
    areas = []
    for i in range(per_orbit * orbits):
        phi, ell = drive.step(i, phi, ell, vectors)
        if (i + 1) % per_orbit == 0:
            areas.append(vectors[0][0] * vectors[1][1] - vectors[0][1] * vectors[1][0])
    return np.asarray(areas)
