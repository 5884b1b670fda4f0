"""
hyperion/phase_space.py

Behavior:
    - RotorWavefunction: amplitudes c_m over angular-momentum states m = -M..M.
    - Coherent states |x, p> with c_m ~ exp[-(dx/hbar)^2 (p - m hbar)^2] exp(-i m x);
      with psi(phi) = sum_m c_m exp(i m phi) / sqrt(2 pi) the packet sits at phi = x.
    - Husimi densities on a grid of cell centers, by one matrix product.
    - Coarse-grained effects: the coherent-state projector integrated over a
      rectangular cell, in closed form (exponential integral in x, erf in p).
    - Diagnostics: completeness on the retained block, projectivity and
      commutator residuals of sampled cells, region probabilities, the Husimi
      x-marginal and its direct-convolution oracle.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erf

from quantum.qcore import InvalidInputError, PovmKind, PovmSet, StateVector, TruncationError

from .constants import (
    CENTER_FRACTION,
    MAX_POVM_DELTA_X,
    MIN_CUT_RATIO,
    RETAINED_MARGIN,
    TAIL_FRACTION,
    TAIL_MASS_MAX,
    TRUNCATION_MARGIN,
    TWO_PI,
)

logger = logging.getLogger(__name__)


def momentum_width(hbar: float, delta_x: float) -> float:
    """delta_p = hbar / (2 delta_x)."""
    return hbar / (2.0 * delta_x)


def choose_truncation(p_extent: float, hbar: float, delta_x: float, margin: float = TRUNCATION_MARGIN) -> int:
    """M covering |p| <= p_extent plus ``margin`` momentum widths."""
    return int(math.ceil((p_extent + margin * momentum_width(hbar, delta_x)) / hbar))


@dataclass(frozen=True)
class RotorWavefunction:
    """
    :param coefficients: c_m for m = -M..M
    :param hbar: effective hbar
    :param delta_x: coherent-state width used for Husimi densities
    """

    coefficients: np.ndarray
    hbar: float
    delta_x: float

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size % 2 == 0:
            raise InvalidInputError(f"rotor amplitudes need odd length 2M + 1, got {coeffs.shape}")
        if self.hbar <= 0.0 or self.delta_x <= 0.0:
            raise InvalidInputError("hbar and delta_x must be positive")
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def M(self) -> int:
        return (self.coefficients.size - 1) // 2

    @property
    def m(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    @property
    def state(self) -> StateVector:
        return StateVector(self.coefficients)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def tail_mass(self, fraction: float = TAIL_FRACTION) -> float:
        """Probability in |m| > fraction * M."""
        outside = np.abs(self.m) > fraction * self.M
        return float(np.sum(np.abs(self.coefficients[outside]) ** 2))

    def replace(self, coefficients: np.ndarray) -> "RotorWavefunction":
        return RotorWavefunction(coefficients, self.hbar, self.delta_x)


def _lattice_norm_sq(center: np.ndarray, delta_x: float) -> np.ndarray:
    """1 / sum over all integers m of exp(-2 dx^2 (m - center)^2)."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    reach = int(math.ceil(8.0 / delta_x)) + 2
    offsets = np.arange(-reach, reach + 1)
    m = np.round(center)[:, None] + offsets[None, :]
    return 1.0 / np.sum(np.exp(-2.0 * delta_x ** 2 * (m - center[:, None]) ** 2), axis=1)


def coherent_amplitudes(x: np.ndarray, p: np.ndarray, M: int, hbar: float, delta_x: float) -> np.ndarray:
    """Columns c_m(x_j, p_j) for paired points; shape (2M + 1, n_points)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    m = np.arange(-M, M + 1)[:, None]
    center = p / hbar
    envelope = np.exp(-delta_x ** 2 * (m - center[None, :]) ** 2)
    return np.sqrt(_lattice_norm_sq(center, delta_x))[None, :] * envelope * np.exp(-1j * m * x[None, :])


def coherent_state(x: float, p: float, M: int, hbar: float, delta_x: float) -> RotorWavefunction:
    """
    Coherent state |x, p> on the truncated basis.

    :param x: angle of the packet center
    :param p: angular momentum of the packet center
    :param M: truncation, m = -M..M
    :raises TruncationError: when |p| / hbar >= 0.8 M or the tail beyond 0.9 M exceeds 1e-8
    """
    if hbar <= 0.0 or delta_x <= 0.0 or M < 1:
        raise InvalidInputError(f"need hbar > 0, delta_x > 0 and M >= 1, got {hbar}, {delta_x}, {M}")
    if abs(p) / hbar >= CENTER_FRACTION * M:
        raise TruncationError(f"|p|/hbar = {abs(p) / hbar:.1f} is not inside 0.8 M = {CENTER_FRACTION * M:.1f}",
                              p=p, M=M)
    psi = RotorWavefunction(coherent_amplitudes(x, p, M, hbar, delta_x)[:, 0], hbar, delta_x)
    if psi.tail_mass() > TAIL_MASS_MAX:
        raise TruncationError(f"coherent state tail mass {psi.tail_mass():.2e} beyond 0.9 M", M=M)
    return psi


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """
    Rectangular partition of [x_offset, x_offset + 2 pi) x [p_min, p_max].

    The cut-to-coherence ratio is not enforced here so that fine evaluation
    grids for Husimi densities can share the type; phase_space_povm checks it.
    """

    x_cells: int
    p_cells: int
    p_min: float
    p_max: float
    x_offset: float = 0.0

    def __post_init__(self):
        if self.x_cells < 1 or self.p_cells < 1:
            raise InvalidInputError(f"grid needs at least one cell per axis, got {self.x_cells} x {self.p_cells}")
        if not self.p_max > self.p_min:
            raise InvalidInputError(f"p_max must exceed p_min, got [{self.p_min}, {self.p_max}]")

    @property
    def cell_x(self) -> float:
        return TWO_PI / self.x_cells

    @property
    def cell_p(self) -> float:
        return (self.p_max - self.p_min) / self.p_cells

    @property
    def x_centers(self) -> np.ndarray:
        return self.x_offset + self.cell_x * (np.arange(self.x_cells) + 0.5)

    @property
    def p_centers(self) -> np.ndarray:
        return self.p_min + self.cell_p * (np.arange(self.p_cells) + 0.5)

    def x_bounds(self, ix: int) -> Tuple[float, float]:
        return self.x_offset + ix * self.cell_x, self.x_offset + (ix + 1) * self.cell_x

    def p_bounds(self, ip: int) -> Tuple[float, float]:
        return self.p_min + ip * self.cell_p, self.p_min + (ip + 1) * self.cell_p

    def cut_ratios(self, hbar: float, delta_x: float) -> Tuple[float, float]:
        """(l_cut / l_coh, p_cut / p_coh) with l_coh = delta_x and p_coh = hbar / (2 delta_x)."""
        return self.cell_x / delta_x, self.cell_p / momentum_width(hbar, delta_x)

    def check_cut(self, hbar: float, delta_x: float, minimum: float = MIN_CUT_RATIO) -> None:
        rx, rp = self.cut_ratios(hbar, delta_x)
        if min(rx, rp) < minimum:
            raise InvalidInputError(
                f"cells are {rx:.1f} x {rp:.1f} coherence lengths; the cut needs at least {minimum:g} on both axes"
            )

    def shifted(self, x_offset: float) -> "PhaseSpaceGrid":
        return PhaseSpaceGrid(self.x_cells, self.p_cells, self.p_min, self.p_max, x_offset)

    def labels(self) -> List[str]:
        return [f"x{ix}p{ip}" for ix in range(self.x_cells) for ip in range(self.p_cells)]

    @classmethod
    def for_ratio(cls, ratio: float, hbar: float, delta_x: float, p_min: float, p_max: float) -> "PhaseSpaceGrid":
        """Finest grid whose cells are at least ``ratio`` coherence lengths across on both axes."""
        x_cells = max(1, int(math.floor(TWO_PI / (ratio * delta_x) + 1e-9)))
        p_cells = max(1, int(math.floor((p_max - p_min) / (ratio * momentum_width(hbar, delta_x)) + 1e-9)))
        return cls(x_cells, p_cells, p_min, p_max)


def husimi(psi: RotorWavefunction, grid: PhaseSpaceGrid) -> np.ndarray:
    """
    rho(x, p) = |<x, p|Psi>|^2 at the cell centers.

    :return: array of shape (x_cells, p_cells), non-negative
    """
    m = psi.m
    centers = grid.p_centers / psi.hbar
    envelope = np.sqrt(_lattice_norm_sq(centers, psi.delta_x))[:, None] * np.exp(
        -psi.delta_x ** 2 * (m[None, :] - centers[:, None]) ** 2
    )
    phases = np.exp(1j * np.outer(m, grid.x_centers))
    overlaps = (envelope * psi.coefficients[None, :]) @ phases
    return (np.abs(overlaps) ** 2).T


def husimi_norm(rho: np.ndarray, grid: PhaseSpaceGrid, hbar: float) -> float:
    """sum rho dx dp / (2 pi hbar)."""
    return float(np.sum(rho) * grid.cell_x * grid.cell_p / (TWO_PI * hbar))


def husimi_x_marginal(psi: RotorWavefunction, grid: PhaseSpaceGrid) -> np.ndarray:
    """Density in x of the Husimi function: int rho dp / (2 pi hbar) at the x centers."""
    rho = husimi(psi, grid)
    return rho.sum(axis=1) * grid.cell_p / (TWO_PI * psi.hbar)


def position_density(psi: RotorWavefunction, phi: np.ndarray) -> np.ndarray:
    """|psi(phi)|^2 with psi(phi) = sum_m c_m exp(i m phi) / sqrt(2 pi)."""
    values = np.exp(1j * np.outer(np.asarray(phi, dtype=float), psi.m)) @ psi.coefficients
    return np.abs(values) ** 2 / TWO_PI


def smoothed_position_density(psi: RotorWavefunction, x: np.ndarray, samples: Optional[int] = None) -> np.ndarray:
    """
    |psi(phi)|^2 convolved with a periodic Gaussian of width delta_x, by direct summation.

    :param x: evaluation angles
    :param samples: angle grid used for the convolution (defaults to 4 (2M + 1))
    """
    samples = samples or 4 * psi.coefficients.size
    phi = TWO_PI * np.arange(samples) / samples
    density = position_density(psi, phi)
    gap = np.asarray(x, dtype=float)[:, None] - phi[None, :]
    images = np.arange(-3, 4)
    kernel = np.zeros_like(gap)
    for n in images:
        kernel += np.exp(-((gap + TWO_PI * n) ** 2) / (2.0 * psi.delta_x ** 2))
    kernel /= psi.delta_x * math.sqrt(TWO_PI)
    return kernel @ density * (TWO_PI / samples)


def region_operator(x_range: Tuple[float, float], p_range: Tuple[float, float], M: int, hbar: float,
                    delta_x: float) -> np.ndarray:
    """
    int over the rectangle of |x, p><x, p| dx dp / (2 pi hbar), in closed form.

    Entry (m, m') = (1/2pi) X(k) exp(-dx^2 k^2 / 2) [erf(a1) - erf(a0)] / 2, with
    k = m - m', X(k) = int exp(-i k x) dx over the x range and
    a = sqrt(2) dx (p - (m + m') hbar / 2) / hbar.
    """
    x0, x1 = x_range
    p0, p1 = p_range
    m = np.arange(-M, M + 1)
    k = (m[:, None] - m[None, :]).astype(float)
    safe_k = np.where(k == 0.0, 1.0, k)
    x_factor = np.where(k == 0.0, x1 - x0, (np.exp(-1j * k * x1) - np.exp(-1j * k * x0)) / (-1j * safe_k))
    centre = 0.5 * (m[:, None] + m[None, :]) * hbar
    scale = math.sqrt(2.0) * delta_x / hbar
    p_factor = 0.5 * (erf(scale * (p1 - centre)) - erf(scale * (p0 - centre)))
    op = x_factor * np.exp(-0.5 * delta_x ** 2 * k ** 2) * p_factor / TWO_PI
    return 0.5 * (op + op.conj().T)


def cell_operator(grid: PhaseSpaceGrid, ix: int, ip: int, M: int, hbar: float, delta_x: float) -> np.ndarray:
    return region_operator(grid.x_bounds(ix), grid.p_bounds(ip), M, hbar, delta_x)


def phase_space_povm(grid: PhaseSpaceGrid, M: int, hbar: float, delta_x: float) -> PovmSet:
    """
    Coarse-grained effects, one per cell, ordered x-major.

    :raises InvalidInputError: when cells are smaller than 10 coherence lengths
    """
    grid.check_cut(hbar, delta_x)
    if delta_x > MAX_POVM_DELTA_X:
        logger.warning("Hyperion Phase Space: delta_x = %.3g above %.2g, completeness degrades to %.1e",
                       delta_x, MAX_POVM_DELTA_X, 2.0 * math.exp(-math.pi ** 2 / (2.0 * delta_x ** 2)))
    arrays = [cell_operator(grid, ix, ip, M, hbar, delta_x)
              for ix in range(grid.x_cells) for ip in range(grid.p_cells)]
    logger.debug("Hyperion Phase Space: %d cells on a basis of %d states", len(arrays), 2 * M + 1)
    return PovmSet.from_arrays(arrays, PovmKind.EFFECTS, grid.labels())


def retained_block(grid: PhaseSpaceGrid, M: int, hbar: float, delta_x: float,
                   margin: float = RETAINED_MARGIN) -> np.ndarray:
    """Indices (into m = -M..M) of states at least ``margin`` momentum widths inside the grid."""
    m = np.arange(-M, M + 1)
    width = momentum_width(hbar, delta_x)
    inside = (m * hbar >= grid.p_min + margin * width) & (m * hbar <= grid.p_max - margin * width)
    return np.flatnonzero(inside)


def completeness_on_block(effects: Sequence[np.ndarray], block: np.ndarray) -> float:
    """max |sum_i Pi_i - 1| restricted to the retained block."""
    if block.size == 0:
        raise InvalidInputError("retained block is empty; widen the grid or the truncation")
    total = np.sum([e[np.ix_(block, block)] for e in effects], axis=0)
    return float(np.max(np.abs(total - np.eye(block.size))))


def resolution_of_identity(grid: PhaseSpaceGrid, M: int, hbar: float, delta_x: float) -> float:
    """
    Midpoint quadrature of |x, p><x, p| dx dp / (2 pi hbar) over the grid's points.

    :return: max entrywise deviation from the identity on the retained block
    """
    xs, ps = np.meshgrid(grid.x_centers, grid.p_centers, indexing="ij")
    amps = coherent_amplitudes(xs.ravel(), ps.ravel(), M, hbar, delta_x)
    total = (amps @ amps.conj().T) * grid.cell_x * grid.cell_p / (TWO_PI * hbar)
    return completeness_on_block([total], retained_block(grid, M, hbar, delta_x))


@dataclass
class AbelianizationReport:
    ratio: Tuple[float, float]
    projectivity: float
    commutator: float
    cells: List[Tuple[int, int]]

    def to_dict(self) -> dict:
        return {
            "ratio_x": self.ratio[0],
            "ratio_p": self.ratio[1],
            "projectivity": self.projectivity,
            "commutator": self.commutator,
            "cells": [list(c) for c in self.cells],
        }


def _sampled_cells(grid: PhaseSpaceGrid) -> List[Tuple[int, int]]:
    ix, ip = grid.x_cells // 2, grid.p_cells // 2
    cells = [(ix, ip)]
    if grid.x_cells > 1:
        cells.append(((ix + 1) % grid.x_cells, ip))
    if grid.p_cells > 1:
        cells.append((ix, ip + 1 if ip + 1 < grid.p_cells else ip - 1))
    return cells


def abelianization_residuals(grid: PhaseSpaceGrid, M: int, hbar: float, delta_x: float) -> AbelianizationReport:
    """
    Normalized residuals of a central cell and its neighbours:
    max ||Pi^2 - Pi||_F / ||Pi||_F and max ||[Pi_i, Pi_j]||_F / sqrt(||Pi_i||_F ||Pi_j||_F).
    """
    cells = _sampled_cells(grid)
    ops = [cell_operator(grid, ix, ip, M, hbar, delta_x) for ix, ip in cells]
    norms = [np.linalg.norm(op) for op in ops]
    projectivity = max(float(np.linalg.norm(op @ op - op) / n) for op, n in zip(ops, norms))
    commutator = 0.0
    for a in range(len(ops)):
        for b in range(a + 1, len(ops)):
            c = ops[a] @ ops[b] - ops[b] @ ops[a]
            commutator = max(commutator, float(np.linalg.norm(c) / math.sqrt(norms[a] * norms[b])))
    return AbelianizationReport(grid.cut_ratios(hbar, delta_x), projectivity, commutator, cells)


def region_probability(psi: RotorWavefunction, x_range: Tuple[float, float], p_range: Tuple[float, float]) -> float:
    """<Psi|Pi_region|Psi> for a rectangle in phase space."""
    op = region_operator(x_range, p_range, psi.M, psi.hbar, psi.delta_x)
    return float(np.real(np.vdot(psi.coefficients, op @ psi.coefficients)))


def coarse_region_probability(psi: RotorWavefunction, grid: PhaseSpaceGrid,
                              x_range: Tuple[float, float], p_range: Tuple[float, float]) -> float:
    """Sum of cell probabilities over the cells whose centers fall inside the rectangle."""
    total = 0.0
    for ix, xc in enumerate(grid.x_centers):
        if not x_range[0] <= xc % TWO_PI < x_range[1]:
            continue
        for ip, pc in enumerate(grid.p_centers):
            if p_range[0] <= pc < p_range[1]:
                op = cell_operator(grid, ix, ip, psi.M, psi.hbar, psi.delta_x)
                total += float(np.real(np.vdot(psi.coefficients, op @ psi.coefficients)))
    return total


def povm_summary(povm: PovmSet, grid: PhaseSpaceGrid, M: int, hbar: float, delta_x: float) -> Dict[str, float]:
    block = retained_block(grid, M, hbar, delta_x)
    rx, rp = grid.cut_ratios(hbar, delta_x)
    return {
        "cells": len(povm),
        "dimension": 2 * M + 1,
        "retained": int(block.size),
        "completeness_residual": completeness_on_block(povm.effects(), block),
        "ratio_x": rx,
        "ratio_p": rp,
    }


def cell_probabilities(psi: RotorWavefunction, grid: PhaseSpaceGrid) -> np.ndarray:
    """
    <Psi|Pi_cell|Psi> for every cell, one operator at a time.

    :return: array of shape (x_cells, p_cells)
    """
    probs = np.empty((grid.x_cells, grid.p_cells))
    for ix in range(grid.x_cells):
        for ip in range(grid.p_cells):
            op = cell_operator(grid, ix, ip, psi.M, psi.hbar, psi.delta_x)
            probs[ix, ip] = float(np.real(np.vdot(psi.coefficients, op @ psi.coefficients)))
    return probs


def grid_completeness(grid: PhaseSpaceGrid, M: int, hbar: float, delta_x: float) -> float:
    """Completeness residual on the retained block, accumulating the cells without storing them."""
    block = retained_block(grid, M, hbar, delta_x)
    if block.size == 0:
        raise InvalidInputError("retained block is empty; widen the grid or the truncation")
    total = np.zeros((block.size, block.size), dtype=complex)
    for ix in range(grid.x_cells):
        for ip in range(grid.p_cells):
            total += cell_operator(grid, ix, ip, M, hbar, delta_x)[np.ix_(block, block)]
    return float(np.max(np.abs(total - np.eye(block.size))))
