"""
decay/unravel.py

Behavior:
    - Kraus pairs for one detector window: photon counting, and homodyne
      detection with a local-oscillator amplitude beta.
    - unravel / unravel_ensemble sample one outcome per window from the exact
      (renormalized) probabilities of the Kraus pair and condition the state.
      Path k draws its uniforms from stream k in fixed blocks, so an ensemble
      run reproduces the single-path results exactly.
    - Ensemble statistics: mean excited population with standard error,
      first-click window, click counts and quadratic variation of the overlap.
    - Fitting: censored geometric estimate of the decay rate, survival curve
      and a Kolmogorov-Smirnov comparison with the exponential arrival law.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from quantum.qcore import ImpossibleOutcome, InvalidInputError, OperatorMatrix, PovmKind, PovmSet, RngStream, StateVector
from quantum.qcore.constants import ALGEBRAIC_TOL, ZERO_NORM_TOL

from .constants import DRAW_BLOCK, EXCITED, GAMMA_ETA_MAX, HOMODYNE_WINDOW_SCALE, KEPT_PATHS, TWO_LEVEL_LABELS

logger = logging.getLogger(__name__)

# a = |psi0><psi1|
LOWERING = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
OUTCOME_LABELS = ("no_click", "click")
CLICK = 1


def _bare_hamiltonian(H: Optional[OperatorMatrix]) -> np.ndarray:
    if H is None:
        return np.zeros((2, 2), dtype=complex)
    if H.dim != 2:
        raise InvalidInputError(f"two-level Hamiltonian expected, got dim {H.dim}")
    if not H.hermitian:
        H = OperatorMatrix(H.entries, hermitian=True, name=H.name)
    return np.asarray(H.entries)


def photon_counting_ops(gamma: float, eta: float, H: Optional[OperatorMatrix] = None) -> PovmSet:
    """
    Kraus pair of a photon counter over one window.

    :param gamma: decay constant (population decays as exp(-2 gamma t))
    :param eta: window length, gamma * eta < 0.05
    :param H: two-level Hamiltonian in the rotating frame; None means H = 0
    :return: (no_click, click) with click proportional to the lowering operator
    """
    return homodyne_ops(gamma, eta, 0.0, H)


def homodyne_ops(gamma: float, eta: float, beta: complex, H: Optional[OperatorMatrix] = None) -> PovmSet:
    """
    Kraus pair for homodyne detection with local-oscillator amplitude beta.

    Omega_1 = 1 - (i H + 2 sqrt(gamma) beta* a + gamma a^dag a + |beta|^2) eta,
    Omega_0 = sqrt(2 eta) (sqrt(gamma) a + beta). beta = 0 gives the counting pair.

    :return: PovmSet ordered (Omega_1, Omega_0), labelled (no_click, click)
    """
    if gamma < 0.0 or eta <= 0.0:
        raise InvalidInputError(f"need gamma >= 0 and eta > 0, got gamma={gamma}, eta={eta}")
    if gamma * eta >= GAMMA_ETA_MAX:
        raise InvalidInputError(f"gamma * eta = {gamma * eta:.4g} must stay below {GAMMA_ETA_MAX}")
    root = math.sqrt(gamma)
    if (root + abs(beta)) ** 2 * eta >= GAMMA_ETA_MAX:
        raise InvalidInputError(
            f"(sqrt(gamma) + |beta|)^2 eta = {(root + abs(beta)) ** 2 * eta:.4g} must stay below {GAMMA_ETA_MAX}"
        )
    hamiltonian = _bare_hamiltonian(H)
    eye = np.eye(2, dtype=complex)
    number = LOWERING.conj().T @ LOWERING
    drift = 1j * hamiltonian + 2.0 * root * np.conj(beta) * LOWERING + gamma * number + abs(beta) ** 2 * eye
    no_click = eye - drift * eta
    click = math.sqrt(2.0 * eta) * (root * LOWERING + beta * eye)
    return PovmSet(
        (OperatorMatrix(no_click, name="no_click"), OperatorMatrix(click, name="click")),
        PovmKind.KRAUS,
        OUTCOME_LABELS,
    )


def kraus_defect(ops: PovmSet) -> float:
    """max |sum_i Omega_i^dag Omega_i - 1|; O(eta^2) for the window pairs."""
    return float(np.max(np.abs(np.sum(ops.effects(), axis=0) - np.eye(ops.dim))))


def homodyne_window(gamma: float, beta: complex, eta_max: float) -> float:
    """Window length that keeps (sqrt(gamma) + |beta|)^2 eta at the small-window scale."""
    scale = (math.sqrt(gamma) + abs(beta)) ** 2
    if scale == 0.0:
        return eta_max
    return min(eta_max, HOMODYNE_WINDOW_SCALE / scale)


@dataclass
class UnravelRecord:
    times: np.ndarray
    overlap: np.ndarray
    clicked: np.ndarray

    @property
    def clicks(self) -> int:
        return int(self.clicked.sum())

    @property
    def first_click(self) -> int:
        """Window index (1-based) of the first click, 0 when there was none."""
        hits = np.flatnonzero(self.clicked)
        return int(hits[0]) if hits.size else 0

    def csv_rows(self):
        return ["t", "overlap", "clicked"], [
            [float(t), float(o), int(c)] for t, o, c in zip(self.times, self.overlap, self.clicked)
        ]


@dataclass
class UnravelEnsemble:
    eta: float
    times: np.ndarray
    population_mean: np.ndarray
    population_stderr: np.ndarray
    first_click: np.ndarray
    click_counts: np.ndarray
    quadratic_variation: np.ndarray
    kept: List[UnravelRecord] = field(default_factory=list)

    @property
    def n_paths(self) -> int:
        return self.first_click.size

    @property
    def steps(self) -> int:
        return self.times.size - 1

    def summary(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "steps": self.steps,
            "eta": self.eta,
            "final_population": float(self.population_mean[-1]),
            "final_population_stderr": float(self.population_stderr[-1]),
            "mean_clicks": float(self.click_counts.mean()),
            "max_clicks": int(self.click_counts.max()),
            "mean_quadratic_variation": float(self.quadratic_variation.mean()),
            "no_click_fraction": float(np.mean(self.first_click == 0)),
        }


def _check_inputs(ops: PovmSet, psi0: StateVector, steps: int, eta: float) -> None:
    if ops.kind is not PovmKind.KRAUS or len(ops) != 2 or ops.dim != 2:
        raise InvalidInputError("unraveling needs a two-element Kraus pair on the two-level atom")
    if psi0.basis_dim != 2 or not psi0.is_normalized(ALGEBRAIC_TOL):
        raise InvalidInputError("initial atom state must be a normalized two-level state")
    if steps < 0 or eta <= 0.0:
        raise InvalidInputError(f"need steps >= 0 and eta > 0, got steps={steps}, eta={eta}")


def unravel_ensemble(ops: PovmSet, psi0: StateVector, steps: int, eta: float,
                     streams: Sequence[RngStream], keep: int = KEPT_PATHS) -> UnravelEnsemble:
    """
    Run many window-by-window trajectories in lockstep.

    :param ops: two-element Kraus pair ordered (no_click, click)
    :param psi0: normalized two-level initial state
    :param steps: number of windows
    :param eta: window length
    :param streams: one stream per path, consumed one uniform per window
    :param keep: number of leading paths whose full overlap series is returned
    """
    _check_inputs(ops, psi0, steps, eta)
    streams = list(streams)
    n_paths = len(streams)
    if n_paths == 0:
        raise InvalidInputError("unravel_ensemble needs at least one stream")
    keep = min(keep, n_paths)
    no_click_t = ops.elements[0].entries.T
    click_t = ops.elements[1].entries.T

    states = np.tile(psi0.amplitudes, (n_paths, 1))
    overlap = np.abs(states[:, EXCITED])
    pop_sum = np.zeros(steps + 1)
    pop_sq = np.zeros(steps + 1)
    pop_sum[0] = float(np.sum(overlap ** 2))
    pop_sq[0] = float(np.sum(overlap ** 4))
    first_click = np.zeros(n_paths, dtype=np.int64)
    click_counts = np.zeros(n_paths, dtype=np.int64)
    quadratic_variation = np.zeros(n_paths)
    kept_overlap = np.empty((keep, steps + 1))
    kept_clicked = np.zeros((keep, steps + 1), dtype=bool)
    kept_overlap[:, 0] = overlap[:keep]

    for block_start in range(0, steps, DRAW_BLOCK):
        block = min(DRAW_BLOCK, steps - block_start)
        uniforms = np.stack([s.uniforms(block) for s in streams])
        for offset in range(block):
            n = block_start + offset + 1
            quiet = states @ no_click_t
            loud = states @ click_t
            w_quiet = np.einsum("pd,pd->p", quiet.conj(), quiet).real
            w_loud = np.einsum("pd,pd->p", loud.conj(), loud).real
            p_quiet = w_quiet / (w_quiet + w_loud)
            click = uniforms[:, offset] >= p_quiet
            chosen = np.where(click[:, None], loud, quiet)
            norms = np.sqrt(np.where(click, w_loud, w_quiet))
            if np.any(norms <= ZERO_NORM_TOL):
                bad = int(np.flatnonzero(norms <= ZERO_NORM_TOL)[0])
                raise ImpossibleOutcome(f"path {bad}: sampled window outcome has norm {norms[bad]:.3e} at window {n}")
            states = chosen / norms[:, None]
            new_overlap = np.abs(states[:, EXCITED])
            quadratic_variation += (new_overlap - overlap) ** 2
            overlap = new_overlap
            population = overlap ** 2
            pop_sum[n] = float(population.sum())
            pop_sq[n] = float(np.sum(population ** 2))
            click_counts += click
            first_click = np.where((first_click == 0) & click, n, first_click)
            kept_overlap[:, n] = overlap[:keep]
            kept_clicked[:, n] = click[:keep]

    times = eta * np.arange(steps + 1)
    mean = pop_sum / n_paths
    variance = np.clip(pop_sq / n_paths - mean ** 2, 0.0, None)
    stderr = np.sqrt(variance / max(n_paths - 1, 1))
    kept = [UnravelRecord(times, kept_overlap[k], kept_clicked[k]) for k in range(keep)]
    logger.info("Decay Unraveling: %d paths x %d windows, %d clicks in total", n_paths, steps, int(click_counts.sum()))
    return UnravelEnsemble(eta, times, mean, stderr, first_click, click_counts, quadratic_variation, kept)


def unravel(ops: PovmSet, psi0: StateVector, steps: int, eta: float, rng: RngStream) -> UnravelRecord:
    """
    One trajectory: sample and condition once per window.

    :return: UnravelRecord with |<psi1|psi(t)>| at t = 0, eta, ..., steps * eta
    """
    return unravel_ensemble(ops, psi0, steps, eta, [rng], keep=1).kept[0]


def excited_state() -> StateVector:
    return StateVector.basis(2, EXCITED, TWO_LEVEL_LABELS)


@dataclass
class DecayFit:
    rate: float
    stderr: float
    events: int
    exposure: int

    def to_dict(self) -> dict:
        return {"rate": self.rate, "stderr": self.stderr, "events": self.events, "exposure": self.exposure}


def fit_decay_rate(first_click: np.ndarray, steps: int, eta: float) -> DecayFit:
    """
    Censored geometric maximum-likelihood estimate of the click rate.

    A path that clicks in window j has been exposed for j windows; a path with
    no click has been exposed for all of them.

    :param first_click: first-click window per path (0 = none)
    :param steps: number of windows observed
    :param eta: window length
    :return: DecayFit with the continuous rate -ln(1 - p) / eta
    """
    first_click = np.asarray(first_click)
    events = int(np.count_nonzero(first_click))
    exposure = int(np.sum(np.where(first_click > 0, first_click, steps)))
    if exposure == 0:
        raise InvalidInputError("no exposure to fit a rate from")
    p = events / exposure
    if events == 0 or p >= 1.0:
        return DecayFit(0.0 if events == 0 else math.inf, math.nan, events, exposure)
    information = events / p ** 2 + (exposure - events) / (1.0 - p) ** 2
    p_err = 1.0 / math.sqrt(information)
    rate = -math.log1p(-p) / eta
    return DecayFit(rate, p_err / ((1.0 - p) * eta), events, exposure)


def survival_curve(first_click: np.ndarray, steps: int, eta: float):
    """Fraction of paths without a click up to t = n eta, n = 0..steps."""
    first_click = np.asarray(first_click)
    clicked_by = np.bincount(first_click[first_click > 0], minlength=steps + 1).cumsum()
    times = eta * np.arange(steps + 1)
    return times, 1.0 - clicked_by[: steps + 1] / first_click.size


def ks_statistic(first_click: np.ndarray, eta: float, rate: float, steps: int,
                 jitter: Optional[np.ndarray] = None):
    """
    Kolmogorov-Smirnov test of click times against rate * exp(-rate t) truncated to [0, steps * eta].

    :param jitter: uniforms in [0, 1) placing each click inside its window;
        None places it at the window midpoint
    :return: scipy KstestResult (statistic, pvalue)
    """
    first_click = np.asarray(first_click)
    hit = first_click > 0
    offsets = np.full(first_click.size, 0.5) if jitter is None else np.asarray(jitter, dtype=float)
    sample = (first_click[hit] - 1.0 + offsets[hit]) * eta
    if sample.size == 0:
        raise InvalidInputError("no clicks to test")
    horizon = steps * eta
    norm = -math.expm1(-rate * horizon)
    return stats.kstest(sample, lambda t: -np.expm1(-rate * np.asarray(t)) / norm)
