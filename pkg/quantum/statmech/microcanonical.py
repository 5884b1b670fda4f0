"""
statmech/microcanonical.py

Behavior:
    - A microcanonical subspace of dimension d_mc split into coordinate
      sectors; H is a real-symmetric Gaussian random matrix on it (unit
      variance off the diagonal), so its eigenbasis is unrelated to the sectors.
    - thermal_expectations evolves exactly in the eigenbasis and returns
      p_i(t) with long-time averages over the second half of the window.
    - bell_ergodicity_check runs the Bell jump process with the sector
      projectors as the cut and compares time fractions with d_i / d_mc.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from quantum.modal import CutSpec, ErgodicityReport, ergodicity_report, modal_ensemble
from quantum.qcore import InvalidInputError, OperatorMatrix, RngStream, StateVector

from .constants import BOOTSTRAP_RESAMPLES, DT_FRACTION, ERGODICITY_PATHS, MAX_MC_DIMENSION

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MicrocanonicalModel:
    d_mc: int
    sector_dims: Tuple[int, ...]
    H: OperatorMatrix
    cut: CutSpec
    labels: Tuple[str, ...] = field(default=())

    @property
    def sector_povm(self):
        return self.cut.povm

    @property
    def microcanonical_values(self) -> np.ndarray:
        """d_i / d_mc."""
        return np.asarray(self.sector_dims, dtype=float) / self.d_mc

    @property
    def slices(self) -> List[slice]:
        bounds = np.concatenate([[0], np.cumsum(self.sector_dims)])
        return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]

    @cached_property
    def spectrum(self) -> Tuple[np.ndarray, np.ndarray]:
        """(energies, eigenvectors as columns)."""
        return sla.eigh(self.H.entries)

    @property
    def norm(self) -> float:
        energies = self.spectrum[0]
        return float(max(abs(energies[0]), abs(energies[-1])))

    def sector_probs(self, amplitudes: np.ndarray) -> np.ndarray:
        """p_i for one state (d,) or many states (n, d)."""
        weight = np.abs(np.asarray(amplitudes)) ** 2
        return np.stack([weight[..., s].sum(axis=-1) for s in self.slices], axis=-1)

    @property
    def block_diagonal(self) -> bool:
        entries = self.H.entries
        for a, sa in enumerate(self.slices):
            for b, sb in enumerate(self.slices):
                if a != b and np.any(entries[sa, sb] != 0.0):
                    return False
        return True


def build_microcanonical(d_mc: int, sector_dims: Sequence[int], rng: RngStream,
                         block_diagonal: bool = False) -> MicrocanonicalModel:
    """
    Random microcanonical model.

    :param d_mc: subspace dimension, at most 2000
    :param sector_dims: positive sector sizes summing to d_mc
    :param rng: stream for the random Hamiltonian
    :param block_diagonal: zero every element coupling different sectors
    """
    sector_dims = tuple(int(d) for d in sector_dims)
    if d_mc > MAX_MC_DIMENSION:
        raise InvalidInputError(f"d_mc = {d_mc} exceeds the dense limit {MAX_MC_DIMENSION}")
    if not sector_dims or any(d <= 0 for d in sector_dims):
        raise InvalidInputError(f"sector sizes must be positive, got {sector_dims}")
    if sum(sector_dims) != d_mc:
        raise InvalidInputError(f"sector sizes {sector_dims} do not add up to d_mc = {d_mc}")
    draw = rng.generator.standard_normal((d_mc, d_mc))
    entries = (draw + draw.T) / math.sqrt(2.0)
    labels = tuple(f"sector{i}" for i in range(len(sector_dims)))
    model_cut = CutSpec.from_blocks(sector_dims, labels)
    if block_diagonal:
        mask = np.zeros((d_mc, d_mc), dtype=bool)
        start = 0
        for size in sector_dims:
            mask[start:start + size, start:start + size] = True
            start += size
        entries = np.where(mask, entries, 0.0)
    H = OperatorMatrix(entries.astype(complex), hermitian=True, name="H_mc")
    logger.debug("Thermalization: built d_mc = %d model with sectors %s", d_mc, sector_dims)
    return MicrocanonicalModel(d_mc, sector_dims, H, model_cut, labels)


def participation_ratio(model: MicrocanonicalModel) -> np.ndarray:
    """1 / sum_k |<k|E>|^4 for every eigenvector |E>, in the sector (coordinate) basis."""
    vectors = model.spectrum[1]
    return 1.0 / np.sum(np.abs(vectors) ** 4, axis=0)


def random_subspace_state(model: MicrocanonicalModel, rng: RngStream) -> StateVector:
    draw = rng.generator.standard_normal(model.d_mc) + 1j * rng.generator.standard_normal(model.d_mc)
    return StateVector(draw).normalize()


@dataclass
class ThermalSeries:
    times: np.ndarray
    probs: np.ndarray
    long_time_average: np.ndarray
    targets: np.ndarray

    @property
    def max_sum_error(self) -> float:
        return float(np.max(np.abs(self.probs.sum(axis=1) - 1.0)))

    @property
    def deviation(self) -> np.ndarray:
        return self.long_time_average - self.targets

    def csv_rows(self):
        header = ["t"] + [f"p{i}" for i in range(self.probs.shape[1])]
        return header, [[float(t)] + [float(p) for p in row] for t, row in zip(self.times, self.probs)]

    def to_dict(self) -> dict:
        return {
            "long_time_average": self.long_time_average.tolist(),
            "targets": self.targets.tolist(),
            "deviation": self.deviation.tolist(),
            "max_sum_error": self.max_sum_error,
        }


def thermal_expectations(model: MicrocanonicalModel, psi0: StateVector, times: Sequence[float]) -> ThermalSeries:
    """
    p_i(t) = <Psi(t)|Pi_i|Psi(t)> by eigendecomposition, averaged over the second half of ``times``.
    """
    if psi0.basis_dim != model.d_mc:
        raise InvalidInputError(f"state of dimension {psi0.basis_dim} is not in the {model.d_mc}-dimensional subspace")
    if not psi0.is_normalized():
        raise InvalidInputError("initial state must be normalized")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidInputError("times must be a non-empty 1D sequence")
    energies, vectors = model.spectrum
    coeffs = vectors.conj().T @ psi0.amplitudes
    probs = np.empty((times.size, len(model.sector_dims)))
    for start in range(0, times.size, 256):
        chunk = times[start:start + 256]
        states = (np.exp(-1j * np.outer(chunk, energies)) * coeffs[None, :]) @ vectors.T
        probs[start:start + chunk.size] = model.sector_probs(states)
    average = probs[times.size // 2:].mean(axis=0)
    return ThermalSeries(times, probs, average, model.microcanonical_values)


def fraction_variance(fractions: np.ndarray, rng: RngStream, resamples: int = BOOTSTRAP_RESAMPLES) -> np.ndarray:
    """
    Bootstrap variance of the path-averaged occupation fractions.

    :param fractions: (paths, sectors) time fractions of individual paths
    """
    fractions = np.asarray(fractions, dtype=float)
    if fractions.ndim != 2 or fractions.shape[0] < 2:
        raise InvalidInputError("need per-path fractions of at least two paths")
    picks = rng.generator.integers(0, fractions.shape[0], size=(resamples, fractions.shape[0]))
    means = fractions[picks].mean(axis=1)
    return means.var(axis=0, ddof=1)


@dataclass
class ErgodicityCheck:
    fractions: np.ndarray
    stderr: Optional[np.ndarray]
    targets: np.ndarray
    schrodinger_average: np.ndarray
    path_fractions: np.ndarray
    report: ErgodicityReport
    dt: float
    steps: int

    @property
    def z_scores(self) -> Optional[np.ndarray]:
        if self.stderr is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (self.fractions - self.targets) / self.stderr
        return np.where(self.stderr > 0.0, z, np.where(self.fractions == self.targets, 0.0, np.inf))

    def to_dict(self) -> dict:
        z = self.z_scores
        return {
            "fractions": self.fractions.tolist(),
            "stderr": None if self.stderr is None else self.stderr.tolist(),
            "targets": self.targets.tolist(),
            "schrodinger_average": self.schrodinger_average.tolist(),
            "z_scores": None if z is None else [None if not math.isfinite(v) else float(v) for v in z],
            "dt": self.dt,
            "steps": self.steps,
            "report": self.report.to_dict(),
        }


def bell_ergodicity_check(model: MicrocanonicalModel, psi0: StateVector, duration: float, rng: RngStream,
                          paths: int = ERGODICITY_PATHS, dt: Optional[float] = None,
                          threads: int = 1) -> ErgodicityCheck:
    """
    Time fractions of the Bell process over sectors.

    :param duration: time covered by each path; fractions use its second half
    :param rng: parent stream; path k uses child k
    :param dt: step; defaults to 0.01 / ||H||
    """
    if duration <= 0.0:
        raise InvalidInputError(f"duration must be positive, got {duration}")
    if paths < 1:
        raise InvalidInputError(f"need at least one path, got {paths}")
    dt = DT_FRACTION / max(model.norm, 1e-300) if dt is None else dt
    steps = max(2, int(math.ceil(duration / dt)))
    streams = [rng.child(k) for k in range(paths)]
    ensemble = modal_ensemble(model.H, model.cut, psi0, dt, steps, streams, threads=threads)
    burn_in = steps // 2
    report = ergodicity_report(ensemble.paths(), list(model.labels), burn_in=burn_in)
    path_fractions = np.array([p.time_fractions(len(model.sector_dims), burn_in) for p in ensemble.paths()])
    schrodinger = ensemble.schedule.probs[burn_in:-1].mean(axis=0)
    logger.info("Thermalization: %d paths x %d steps, fractions %s, targets %s", paths, steps,
                np.round(report.occupation, 4).tolist(), model.microcanonical_values.tolist())
    return ErgodicityCheck(report.occupation, report.occupation_stderr, model.microcanonical_values,
                           schrodinger, path_fractions, report, dt, steps)


def start_sector_state(model: MicrocanonicalModel, sector: int, rng: RngStream) -> StateVector:
    """Random state supported on one sector only."""
    if not 0 <= sector < len(model.sector_dims):
        raise InvalidInputError(f"no sector {sector}")
    amplitudes = np.zeros(model.d_mc, dtype=complex)
    block = model.slices[sector]
    size = block.stop - block.start
    amplitudes[block] = rng.generator.standard_normal(size) + 1j * rng.generator.standard_normal(size)
    return StateVector(amplitudes).normalize()
