"""
modal/engine.py

Behavior:
    - The global state evolves by the Schrodinger equation; it does not depend
      on which local state a path currently occupies. The rates are therefore
      computed once per step (at mid-step) and shared by every path.
    - Each path consumes one uniform per step from its own stream: a jump out of
      the current state j happens when u < dt * sum_k T_kj, the target being
      chosen by the cumulative position of u.
    - simulate_modal runs one path; modal_ensemble runs many, optionally split
      across worker threads with results gathered in stream order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from scipy import linalg as sla

from quantum.qcore import InvalidInputError, OperatorMatrix, RngStream, StateVector, StepTooLarge, evolve_step
from quantum.measure import sample_outcome

from .constants import JUMP_PROB_MAX, JUMP_PROB_WARN
from .cut import CutSpec, local_states
from .rates import bell_rates

logger = logging.getLogger(__name__)

Hamiltonian = Union[OperatorMatrix, Callable[[float], OperatorMatrix]]


@dataclass
class RateSchedule:
    """Mid-step rates ``rates[n, j, i]`` and grid-time probabilities ``probs[n, i]``."""

    dt: float
    t0: float
    rates: np.ndarray
    probs: np.ndarray
    flagged_steps: int = 0

    @property
    def steps(self) -> int:
        return self.rates.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.steps + 1)


@dataclass
class ModalPath:
    times: np.ndarray
    indices: np.ndarray
    rates_used: List[Tuple[float, int, int, float]] = field(default_factory=list)

    def index_at(self, t: float) -> int:
        position = int(np.searchsorted(self.times, t, side="right")) - 1
        return int(self.indices[max(position, 0)])

    def time_fractions(self, n_states: int, start: int = 0) -> np.ndarray:
        """Fraction of grid intervals spent in each local state from grid index ``start``."""
        counts = np.bincount(self.indices[start:-1], minlength=n_states)
        return counts / max(counts.sum(), 1)

    def csv_rows(self):
        return ["t", "index"], [[float(t), int(j)] for t, j in zip(self.times, self.indices)]

    def transition_log(self) -> List[dict]:
        return [{"t": t, "from": i, "to": j, "rate": rate} for t, i, j, rate in self.rates_used]


def _state_propagator(H: Hamiltonian, psi0: StateVector, t0: float, dt: float):
    """Yields (psi_mid, H_mid, psi_end) for consecutive steps."""
    if isinstance(H, OperatorMatrix):
        energies, vectors = sla.eigh(H.entries)
        coeffs = vectors.conj().T @ psi0.amplitudes
        step = 0
        while True:
            mid = vectors @ (np.exp(-1j * energies * (step + 0.5) * dt) * coeffs)
            end = vectors @ (np.exp(-1j * energies * (step + 1) * dt) * coeffs)
            yield StateVector(mid).normalize(), H, StateVector(end).normalize()
            step += 1
    psi = psi0
    t = t0
    while True:
        H_mid = H(t + 0.5 * dt)
        half = evolve_step(H_mid, psi, 0.5 * dt)
        psi = evolve_step(H_mid, half, 0.5 * dt).normalize()
        yield half.normalize(), H_mid, psi
        t += dt


def rate_schedule(H: Hamiltonian, cut: CutSpec, psi0: StateVector, dt: float, steps: int,
                  t0: float = 0.0) -> RateSchedule:
    """
    Bell rates along the Schrodinger trajectory of the global state.

    :param H: fixed Hamiltonian or callable t -> Hamiltonian
    :param cut: local-state effects
    :param psi0: normalized global state at t0
    :param dt: step length
    :param steps: number of steps
    :param t0: start time
    """
    if dt <= 0.0 or steps < 0:
        raise InvalidInputError(f"need dt > 0 and steps >= 0, got dt={dt}, steps={steps}")
    k = cut.size
    rates = np.zeros((steps, k, k))
    probs = np.zeros((steps + 1, k))
    probs[0] = local_states(cut, psi0).probs
    propagator = _state_propagator(H, psi0, t0, dt)
    flagged = 0
    for n in range(steps):
        psi_mid, H_mid, psi_end = next(propagator)
        matrix = bell_rates(H_mid, local_states(cut, psi_mid))
        rates[n] = matrix.rates
        flagged += bool(matrix.flagged)
        probs[n + 1] = local_states(cut, psi_end).probs
    if flagged:
        logger.debug("Modal Engine: %d steps had near-empty local states", flagged)
    return RateSchedule(dt, t0, rates, probs, flagged)


def constant_schedule(rates: np.ndarray, dt: float, steps: int, t0: float = 0.0) -> RateSchedule:
    """Schedule with frozen rates, for driving the chain without a Hamiltonian."""
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 2 or rates.shape[0] != rates.shape[1] or np.any(rates < 0.0):
        raise InvalidInputError("a constant rate matrix must be square and non-negative")
    k = rates.shape[0]
    frozen = np.broadcast_to(rates, (steps, k, k))
    return RateSchedule(dt, t0, frozen, np.full((steps + 1, k), 1.0 / k))


def jump_chains(schedule: RateSchedule, start: Sequence[int], uniforms: np.ndarray,
                log_transitions: bool = True) -> Tuple[np.ndarray, List[list]]:
    """
    Run many jump chains through shared rates.

    :param schedule: mid-step rates
    :param start: initial local state per path
    :param uniforms: array (paths, steps) of per-step draws
    :return: indices (paths, steps + 1) and per-path transition logs
    """
    n_paths = len(start)
    current = np.asarray(start, dtype=np.int64).copy()
    indices = np.empty((n_paths, schedule.steps + 1), dtype=np.int64)
    indices[:, 0] = current
    logs: List[list] = [[] for _ in range(n_paths)]
    warned = False
    dt = schedule.dt
    for n in range(schedule.steps):
        # columns of the rate matrix for every path's current state
        out_rates = schedule.rates[n][:, current].T
        cumulative = np.cumsum(out_rates * dt, axis=1)
        total = cumulative[:, -1]
        worst = float(total.max()) if n_paths else 0.0
        if worst >= JUMP_PROB_MAX:
            raise StepTooLarge(
                f"jump probability {worst:.3f} per step at t={schedule.t0 + n * dt:.6g}; reduce dt",
                probability=worst, step=n,
            )
        if worst > JUMP_PROB_WARN and not warned:
            logger.warning("Modal Engine: jump probability %.3f per step exceeds %.2f", worst, JUMP_PROB_WARN)
            warned = True
        u = uniforms[:, n]
        jumping = np.flatnonzero(u < total)
        for p in jumping:
            target = int(np.searchsorted(cumulative[p], u[p], side="right"))
            source = int(current[p])
            current[p] = target
            if log_transitions:
                logs[p].append((schedule.t0 + (n + 1) * dt, source, target, float(out_rates[p, target])))
        indices[:, n + 1] = current
    return indices, logs


def simulate_modal(H: Hamiltonian, cut: CutSpec, psi0: StateVector, j0: int, dt: float, steps: int,
                   rng: RngStream, t0: float = 0.0) -> ModalPath:
    """
    One path of the Bell jump process.

    :param H: fixed Hamiltonian or callable t -> Hamiltonian
    :param cut: local-state effects (kept fixed in time)
    :param psi0: normalized initial global state
    :param j0: initial local state
    :param dt: step length, small enough that dt * exit rate < 0.1
    :param steps: number of steps
    :param rng: the path's stream (one uniform per step)
    :raises StepTooLarge: when a jump probability per step reaches 1
    """
    if not 0 <= j0 < cut.size:
        raise InvalidInputError(f"initial local state {j0} out of range 0..{cut.size - 1}")
    schedule = rate_schedule(H, cut, psi0, dt, steps, t0)
    return path_from_schedule(schedule, j0, rng)


def path_from_schedule(schedule: RateSchedule, j0: int, rng: RngStream) -> ModalPath:
    indices, logs = jump_chains(schedule, [j0], rng.uniforms(schedule.steps)[None, :])
    return ModalPath(schedule.times, indices[0], logs[0])


@dataclass
class ModalEnsemble:
    schedule: RateSchedule
    indices: np.ndarray
    logs: List[list]

    @property
    def n_paths(self) -> int:
        return self.indices.shape[0]

    def paths(self) -> List[ModalPath]:
        return [ModalPath(self.schedule.times, self.indices[p], self.logs[p]) for p in range(self.n_paths)]

    def occupation(self) -> Tuple[np.ndarray, np.ndarray]:
        """Ensemble occupation per grid time and its Monte Carlo standard error."""
        k = self.schedule.probs.shape[1]
        onehot = self.indices[:, :, None] == np.arange(k)[None, None, :]
        mean = onehot.mean(axis=0)
        stderr = np.sqrt(np.clip(mean * (1.0 - mean), 0.0, None) / max(self.n_paths - 1, 1))
        return mean, stderr


def _chunk_worker(schedule: RateSchedule, streams: List[RngStream], j0: Optional[int]):
    p0 = schedule.probs[0] / schedule.probs[0].sum()
    start = [j0 if j0 is not None else sample_outcome(p0, s.child(0)) for s in streams]
    uniforms = np.stack([s.uniforms(schedule.steps) for s in streams]) if streams else np.zeros((0, schedule.steps))
    return jump_chains(schedule, start, uniforms)


def modal_ensemble(H: Hamiltonian, cut: CutSpec, psi0: StateVector, dt: float, steps: int,
                   streams: Sequence[RngStream], j0: Optional[int] = None, threads: int = 1,
                   t0: float = 0.0) -> ModalEnsemble:
    """
    Many independent paths sharing one Schrodinger trajectory.

    :param j0: common initial local state; None samples it per path from p(t0)
        using the path's child stream 0
    :param threads: worker threads; the output does not depend on it
    """
    schedule = rate_schedule(H, cut, psi0, dt, steps, t0)
    streams = list(streams)
    chunks = np.array_split(np.arange(len(streams)), max(1, min(threads, len(streams))))
    results = Parallel(n_jobs=len(chunks), prefer="threads")(
        delayed(_chunk_worker)(schedule, [streams[i] for i in chunk], j0) for chunk in chunks
    )
    indices = np.concatenate([r[0] for r in results], axis=0)
    logs = [log for r in results for log in r[1]]
    logger.info("Modal Engine: %d paths over %d steps, %d transitions", len(streams), steps,
                sum(len(log) for log in logs))
    return ModalEnsemble(schedule, indices, logs)
