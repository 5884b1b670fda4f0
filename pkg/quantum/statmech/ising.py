"""
statmech/ising.py

Behavior:
    - Glauber dynamics on an L x L periodic square lattice: pick a site at
      random, flip it with probability 1 / (1 + exp(s h / T)), h the sum of its
      four neighbours. One sweep is L^2 such updates.
    - The rule is Boltzmann-stationary for exp(sum over bonds s s' / (2T)).
    - For L = 2 the full 16-state chain (with the doubled periodic bonds) is
      built exactly, giving the stationary law and the detailed-balance check.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg as sla
from scipy.special import expit

from quantum.qcore import InvalidInputError, RngStream

from .constants import COORDINATION, ERROR_BLOCKS

logger = logging.getLogger(__name__)


def glauber_flip_prob(spin: int, neighbor_sum, temperature: float):
    """
    Probability that ``spin`` flips given its neighbour sum.

    :param spin: +1 or -1
    :param neighbor_sum: sum of the neighbouring spins
    :param temperature: T > 0 in units of J / k_B
    """
    if not temperature > 0.0:
        raise InvalidInputError(f"temperature must be positive, got {temperature}")
    return expit(-np.asarray(spin) * np.asarray(neighbor_sum) / temperature)


@dataclass
class IsingLattice:
    spins: np.ndarray
    temperature: float

    def __post_init__(self):
        spins = np.asarray(self.spins)
        if spins.ndim != 2 or spins.shape[0] != spins.shape[1]:
            raise InvalidInputError(f"spins must be a square L x L array, got shape {spins.shape}")
        if spins.shape[0] < 2:
            raise InvalidInputError("the lattice needs L >= 2")
        if not np.all(np.isin(spins, (-1, 1))):
            raise InvalidInputError("spins must all be +1 or -1")
        if not self.temperature > 0.0:
            raise InvalidInputError(f"temperature must be positive, got {self.temperature}")
        self.spins = spins.astype(np.int8)

    @property
    def L(self) -> int:
        return self.spins.shape[0]

    @property
    def magnetization(self) -> float:
        return float(self.spins.mean())

    def neighbor_sum(self, i: int, j: int) -> int:
        s, L = self.spins, self.L
        return int(s[(i + 1) % L, j]) + int(s[(i - 1) % L, j]) + int(s[i, (j + 1) % L]) + int(s[i, (j - 1) % L])

    def bond_sum(self) -> int:
        """Sum of s s' over the right and down bond of every site."""
        s = self.spins.astype(np.int64)
        return int(np.sum(s * np.roll(s, -1, axis=0)) + np.sum(s * np.roll(s, -1, axis=1)))

    def code(self) -> int:
        """Configuration index: bit k set when spin k (row-major) is +1."""
        bits = (self.spins.ravel() > 0).astype(np.int64)
        return int(np.sum(bits << np.arange(bits.size)))

    @classmethod
    def uniform(cls, L: int, temperature: float, spin: int = 1) -> "IsingLattice":
        return cls(np.full((L, L), spin, dtype=np.int8), temperature)

    @classmethod
    def random(cls, L: int, temperature: float, rng: RngStream) -> "IsingLattice":
        return cls(rng.generator.choice(np.array([-1, 1], dtype=np.int8), size=(L, L)), temperature)


@dataclass
class IsingRun:
    magnetization: np.ndarray
    final: IsingLattice
    codes: Optional[np.ndarray] = None

    def csv_rows(self):
        return ["sweep", "magnetization"], [[k + 1, float(m)] for k, m in enumerate(self.magnetization)]

    @property
    def sign_changes(self) -> int:
        signs = np.sign(self.magnetization)
        signs = signs[signs != 0]
        return int(np.count_nonzero(signs[1:] != signs[:-1]))


def simulate_ising(lattice: IsingLattice, sweeps: int, rng: RngStream, record_states: bool = False) -> IsingRun:
    """
    Random-site sequential Glauber updates.

    :param sweeps: number of sweeps of L^2 updates each
    :param record_states: also return the configuration code after every sweep (L^2 <= 62)
    :return: IsingRun with the magnetization after every sweep; ``lattice`` is not modified
    """
    if sweeps < 0:
        raise InvalidInputError(f"sweeps must be non-negative, got {sweeps}")
    L = lattice.L
    n = L * L
    if record_states and n > 62:
        raise InvalidInputError("configuration codes are only kept for lattices of at most 62 sites")
    T = lattice.temperature
    spins = lattice.spins.astype(np.int64).ravel().tolist()
    up = [((k // L + 1) % L) * L + k % L for k in range(n)]
    down = [((k // L - 1) % L) * L + k % L for k in range(n)]
    right = [(k // L) * L + (k % L + 1) % L for k in range(n)]
    left = [(k // L) * L + (k % L - 1) % L for k in range(n)]
    # flip probability indexed by s * h + COORDINATION
    flip = [float(expit(-(x - COORDINATION) / T)) for x in range(2 * COORDINATION + 1)]

    magnetization = np.empty(sweeps)
    codes = np.empty(sweeps, dtype=np.int64) if record_states else None
    total = sum(spins)
    generator = rng.generator
    for sweep in range(sweeps):
        sites = generator.integers(0, n, size=n).tolist()
        draws = generator.random(n).tolist()
        for k, u in zip(sites, draws):
            s = spins[k]
            h = spins[up[k]] + spins[down[k]] + spins[right[k]] + spins[left[k]]
            if u < flip[s * h + COORDINATION]:
                spins[k] = -s
                total -= 2 * s
        magnetization[sweep] = total / n
        if codes is not None:
            codes[sweep] = sum(1 << k for k, s in enumerate(spins) if s > 0)
    final = IsingLattice(np.asarray(spins, dtype=np.int8).reshape(L, L), T)
    logger.debug("Glauber Ising: %d sweeps at T = %g on L = %d, final m = %.3f", sweeps, T, L, final.magnetization)
    return IsingRun(magnetization, final, codes)


def blocked_mean(series: np.ndarray, blocks: int = ERROR_BLOCKS) -> Tuple[float, float]:
    """
    Mean of a correlated series with a standard error from block averages.

    :return: (mean, stderr)
    """
    series = np.asarray(series, dtype=float)
    if blocks < 2 or series.size < blocks:
        raise InvalidInputError(f"need at least {blocks} samples for {blocks} blocks, got {series.size}")
    size = series.size // blocks
    means = series[: size * blocks].reshape(blocks, size).mean(axis=1)
    return float(series.mean()), float(means.std(ddof=1) / math.sqrt(blocks))


def _configurations(L: int) -> np.ndarray:
    n = L * L
    codes = np.arange(1 << n)
    bits = (codes[:, None] >> np.arange(n)[None, :]) & 1
    return (2 * bits - 1).reshape(-1, L, L)


def glauber_chain(L: int, temperature: float) -> np.ndarray:
    """
    Exact one-update transition matrix P[to, from] over all 2^(L^2) configurations.

    Only small lattices are accepted (L^2 <= 16).
    """
    if L < 2 or L * L > 16:
        raise InvalidInputError(f"exact chain only for 2 <= L and L^2 <= 16, got L = {L}")
    n = L * L
    configs = _configurations(L)
    size = configs.shape[0]
    P = np.zeros((size, size))
    for code, config in enumerate(configs):
        lattice = IsingLattice(config, temperature)
        for k in range(n):
            i, j = divmod(k, L)
            p = float(glauber_flip_prob(int(config[i, j]), lattice.neighbor_sum(i, j), temperature)) / n
            P[code ^ (1 << k), code] += p
            P[code, code] += 1.0 / n - p
    return P


def boltzmann_weights(L: int, temperature: float) -> np.ndarray:
    """exp(bond sum / (2T)) normalized, with the periodic bonds counted as on the lattice."""
    energies = np.array([IsingLattice(c, temperature).bond_sum() for c in _configurations(L)], dtype=float)
    weights = np.exp((energies - energies.max()) / (2.0 * temperature))
    return weights / weights.sum()


def chain_stationary(P: np.ndarray) -> np.ndarray:
    """Stationary law of a column-stochastic matrix."""
    kernel = sla.null_space(P - np.eye(P.shape[0]))
    if kernel.shape[1] != 1:
        raise InvalidInputError(f"chain has {kernel.shape[1]} stationary directions")
    vector = np.abs(kernel[:, 0])
    return vector / vector.sum()


def detailed_balance_residual(L: int, temperature: float) -> float:
    """max |pi_a P[b, a] - pi_b P[a, b]| / (pi_a P[b, a]) over all allowed moves a -> b."""
    P = glauber_chain(L, temperature)
    pi = boltzmann_weights(L, temperature)
    flux = P * pi[None, :]
    off = ~np.eye(P.shape[0], dtype=bool) & (flux > 0.0)
    return float(np.max(np.abs(flux - flux.T)[off] / flux[off]))


def empirical_distribution(codes: np.ndarray, n_states: int, blocks: int = ERROR_BLOCKS) -> Tuple[np.ndarray, np.ndarray]:
    """Visit frequency of each configuration code with blocked standard errors."""
    onehot = (np.asarray(codes)[:, None] == np.arange(n_states)[None, :]).astype(float)
    stats = [blocked_mean(onehot[:, s], blocks) for s in range(n_states)]
    return np.array([m for m, _ in stats]), np.array([e for _, e in stats])
