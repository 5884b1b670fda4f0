"""
hyperion/ehrenfest.py

Behavior:
    - For each hbar_eff: start a minimum-uncertainty coherent state
      (delta_x = delta_p = sqrt(hbar / 2)) on top of a classical initial
      condition, evolve it next to the classical trajectory and record two
      breakdown times: the Husimi spread passing ``threshold`` and the angle
      discrepancy passing ``threshold``. Crossings are interpolated between
      samples; no crossing within the horizon is a censored point.
    - Fits per criterion: t_q against ln(1/hbar), against ln(1/delta_x0) and a
      power law ln t_q against ln(1/hbar), each with R^2.
    - Sweep points are independent and run through joblib threads.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from quantum.qcore import InvalidInputError

from .classical import ClassicalRotorState, LyapunovResult, integrate_classical, lyapunov
from .constants import (
    EHRENFEST_MOMENTUM_WINDOW,
    EHRENFEST_SAMPLES_PER_UNIT,
    EHRENFEST_THRESHOLD,
    MIN_STEPS_PER_ORBIT,
    TRUNCATION_MARGIN,
    TWO_PI,
)
from .orbit import RotorParams
from .phase_space import choose_truncation, coherent_state
from .rotor import RotorObservables, rotor_history

logger = logging.getLogger(__name__)

CRITERIA = ("spread", "discrepancy")


def free_spreading_width(b: float, hbar: float, mass: float, t):
    """Ballistic width sqrt(b^2 + (hbar t / 2 m b)^2) of a free Gaussian packet."""
    if b <= 0.0 or hbar <= 0.0 or mass <= 0.0:
        raise InvalidInputError("width, hbar and mass must be positive")
    return np.sqrt(b ** 2 + (hbar * np.asarray(t, dtype=float) / (2.0 * mass * b)) ** 2)


def minimum_uncertainty_width(hbar: float) -> float:
    return math.sqrt(0.5 * hbar)


def angle_gap(a, b):
    """Distance on the circle, in [0, pi]."""
    return np.abs((np.asarray(a) - np.asarray(b) + math.pi) % TWO_PI - math.pi)


@dataclass
class BreakdownPoint:
    hbar: float
    delta_x: float
    M: int
    t_spread: Optional[float]
    t_discrepancy: Optional[float]
    horizon: float

    def time(self, criterion: str) -> Optional[float]:
        return self.t_spread if criterion == "spread" else self.t_discrepancy

    def to_dict(self) -> dict:
        return {
            "hbar": self.hbar,
            "delta_x": self.delta_x,
            "M": self.M,
            "t_spread": self.t_spread,
            "t_discrepancy": self.t_discrepancy,
            "censored_spread": self.t_spread is None,
            "censored_discrepancy": self.t_discrepancy is None,
        }


@dataclass
class LogFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared, "n_points": self.n_points}


def _fit(x: Sequence[float], y: Sequence[float]) -> Optional[LogFit]:
    if len(x) < 3 or np.ptp(x) == 0.0:
        return None
    result = stats.linregress(x, y)
    return LogFit(float(result.slope), float(result.intercept), float(result.rvalue ** 2), len(x))


@dataclass
class CriterionFits:
    vs_log_hbar: Optional[LogFit]
    vs_log_width: Optional[LogFit]
    power_law: Optional[LogFit]
    censored: int

    def to_dict(self) -> dict:
        def dump(fit):
            return None if fit is None else fit.to_dict()
        return {
            "vs_log_hbar": dump(self.vs_log_hbar),
            "vs_log_width": dump(self.vs_log_width),
            "power_law": dump(self.power_law),
            "censored": self.censored,
        }


@dataclass
class EhrenfestResult:
    points: List[BreakdownPoint]
    fits: Dict[str, CriterionFits]
    lyapunov: Optional[LyapunovResult]
    threshold: float
    agreement: Dict[str, Optional[float]] = field(default_factory=dict)
    width_agreement: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def slope(self) -> Optional[float]:
        """Spread-criterion slope B of t_q = A + B ln(1/hbar_eff)."""
        fit = self.fits["spread"].vs_log_hbar
        return None if fit is None else fit.slope

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "points": [p.to_dict() for p in self.points],
            "fits": {name: f.to_dict() for name, f in self.fits.items()},
            "lyapunov": None if self.lyapunov is None else self.lyapunov.to_dict(),
            "agreement": self.agreement,
            "width_agreement": self.width_agreement,
        }


def _crossing(times: np.ndarray, values: np.ndarray, threshold: float) -> Optional[float]:
    above = np.flatnonzero(values > threshold)
    if above.size == 0:
        return None
    k = int(above[0])
    if k == 0:
        return float(times[0])
    v0, v1 = values[k - 1], values[k]
    if not math.isfinite(v1):
        return float(times[k])
    return float(times[k - 1] + (threshold - v0) / (v1 - v0) * (times[k] - times[k - 1]))


def breakdown_point(params: RotorParams, hbar: float, state0: ClassicalRotorState, horizon: float,
                    threshold: float = EHRENFEST_THRESHOLD, dt: Optional[float] = None,
                    momentum_window: float = EHRENFEST_MOMENTUM_WINDOW) -> BreakdownPoint:
    """
    Breakdown times of one hbar_eff value.

    :param horizon: longest evolution time; crossings later than this are censored
    """
    dt = params.period / MIN_STEPS_PER_ORBIT if dt is None else dt
    n_steps = max(1, int(math.ceil(horizon / dt - 1e-9)))
    dt = horizon / n_steps
    sample_every = max(1, int(round(1.0 / (EHRENFEST_SAMPLES_PER_UNIT * dt))))

    delta_x = minimum_uncertainty_width(hbar)
    window = max(momentum_window, abs(state0.ell) + 1.0)
    M = choose_truncation(window, hbar, delta_x, TRUNCATION_MARGIN)
    psi0 = coherent_state(state0.phi, state0.ell, M, hbar, delta_x)
    classical = integrate_classical(params, state0, (0.0, horizon), dt)

    def both_crossed(step: int, obs: RotorObservables) -> bool:
        gap = float(angle_gap(obs.x_mean, classical.phi[step]))
        return obs.spread > threshold and gap > threshold

    series = rotor_history(psi0, params.with_hbar(hbar), 0.0, dt, n_steps, sample_every, both_crossed)
    indices = np.rint((series.times - series.times[0]) / dt).astype(int)
    gaps = angle_gap(series.x_mean, classical.phi[indices])
    point = BreakdownPoint(
        hbar=hbar,
        delta_x=delta_x,
        M=M,
        t_spread=_crossing(series.times, series.spread, threshold),
        t_discrepancy=_crossing(series.times, gaps, threshold),
        horizon=horizon,
    )
    logger.info("Hyperion Ehrenfest: hbar = %.2e, M = %d, t_spread = %s, t_discrepancy = %s",
                hbar, M, point.t_spread, point.t_discrepancy)
    return point


def _criterion_fits(points: List[BreakdownPoint], criterion: str) -> CriterionFits:
    kept = [p for p in points if p.time(criterion) is not None]
    censored = len(points) - len(kept)
    if censored:
        logger.warning("Hyperion Ehrenfest: %d censored point(s) for the %s criterion", censored, criterion)
    log_hbar = [math.log(1.0 / p.hbar) for p in kept]
    log_width = [math.log(1.0 / p.delta_x) for p in kept]
    times = [p.time(criterion) for p in kept]
    positive = [(x, math.log(t)) for x, t in zip(log_hbar, times) if t > 0.0]
    return CriterionFits(
        vs_log_hbar=_fit(log_hbar, times),
        vs_log_width=_fit(log_width, times),
        power_law=_fit([x for x, _ in positive], [y for _, y in positive]),
        censored=censored,
    )


def ehrenfest_breakdown(params: RotorParams, hbar_values: Sequence[float], threshold: float = EHRENFEST_THRESHOLD,
                        state0: Optional[ClassicalRotorState] = None, horizon: Optional[float] = None,
                        dt: Optional[float] = None, lyapunov_duration: Optional[float] = None,
                        threads: int = 1) -> EhrenfestResult:
    """
    Sweep hbar_eff and fit the breakdown law.

    :param hbar_values: at least four values spanning at least two decades
    :param threshold: spread and discrepancy threshold, in units of R = 1
    :param horizon: evolution time per point; defaults to 20 orbits
    :param lyapunov_duration: duration of the accompanying Lyapunov run; 0 skips it
    :return: EhrenfestResult with per-criterion fits and slope * lambda agreement
    """
    hbar_values = sorted(float(h) for h in hbar_values)
    if len(hbar_values) < 4:
        raise InvalidInputError(f"need at least 4 hbar_eff values, got {len(hbar_values)}")
    if hbar_values[0] <= 0.0:
        raise InvalidInputError("hbar_eff values must be positive")
    if math.log10(hbar_values[-1] / hbar_values[0]) < 2.0 - 1e-9:
        raise InvalidInputError("hbar_eff values must span at least two decades")
    if threshold <= 0.0:
        raise InvalidInputError(f"threshold must be positive, got {threshold}")
    state0 = state0 or ClassicalRotorState(0.3, 1.6)
    horizon = 20.0 * params.period if horizon is None else horizon

    points = Parallel(n_jobs=max(1, min(threads, len(hbar_values))), prefer="threads")(
        delayed(breakdown_point)(params, h, state0, horizon, threshold, dt) for h in hbar_values
    )
    fits = {criterion: _criterion_fits(points, criterion) for criterion in CRITERIA}

    lyap = None
    duration = 200.0 * params.period if lyapunov_duration is None else lyapunov_duration
    if duration > 0.0:
        lyap = lyapunov(params, state0, duration, dt)
    chaotic = lyap is not None and not lyap.regular

    def times_lambda(fit: Optional[LogFit]) -> Optional[float]:
        return fit.slope * lyap.lambda_max if chaotic and fit is not None else None

    agreement = {criterion: times_lambda(fit.vs_log_hbar) for criterion, fit in fits.items()}
    width_agreement = {criterion: times_lambda(fit.vs_log_width) for criterion, fit in fits.items()}
    return EhrenfestResult(points, fits, lyap, threshold, agreement, width_agreement)
