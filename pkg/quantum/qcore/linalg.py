"""
qcore/linalg.py

Behavior:
    - Immutable StateVector / OperatorMatrix wrappers over numpy arrays.
    - Unitary stepping exp(-i H dt) via hermitian eigendecomposition (hbar = 1).
    - Kronecker helpers for composite spaces and random probe objects.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from .constants import HERMITIAN_TOL, NORM_TOL
from .errors import InvalidInputError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class StateVector:
    """
    Complex amplitudes over a finite basis.

    :param amplitudes: 1-D complex array
    :param labels: optional basis names, one per amplitude
    """

    amplitudes: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise InvalidInputError(f"StateVector needs a non-empty 1-D array, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise InvalidInputError("StateVector amplitudes contain NaN or inf")
        if self.labels is not None and len(self.labels) != amps.size:
            raise InvalidInputError(f"{len(self.labels)} labels for {amps.size} amplitudes")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def basis_dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise InvalidInputError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.labels)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>"""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @classmethod
    def basis(cls, dim: int, index: int, labels: Optional[Sequence[str]] = None) -> "StateVector":
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps, tuple(labels) if labels is not None else None)

    @classmethod
    def from_coefficients(cls, coefficients: Sequence[complex], labels: Optional[Sequence[str]] = None) -> "StateVector":
        return cls(np.asarray(coefficients, dtype=complex), tuple(labels) if labels is not None else None)


@dataclass(frozen=True)
class OperatorMatrix:
    """
    Dense square complex matrix. ``hermitian=True`` is checked on construction.
    """

    entries: np.ndarray
    hermitian: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        mat = np.asarray(self.entries)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidInputError(f"operator must be square, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise InvalidInputError(f"operator {self.name!r} contains NaN or inf")
        object.__setattr__(self, "entries", _frozen(mat))
        if self.hermitian:
            residual = hermitian_residual(self.entries)
            scale = max(1.0, float(np.max(np.abs(self.entries))))
            if residual >= HERMITIAN_TOL * scale:
                raise InvalidInputError(f"operator flagged hermitian has |A - A^dagger| = {residual:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.hermitian, self.name)

    def apply(self, psi: StateVector) -> StateVector:
        """Unnormalized image A|psi>."""
        if psi.basis_dim != self.dim:
            raise InvalidInputError(f"operator dim {self.dim} vs state dim {psi.basis_dim}")
        return StateVector(self.entries @ psi.amplitudes, psi.labels)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries @ other.entries)

    @classmethod
    def identity(cls, dim: int) -> "OperatorMatrix":
        return cls(np.eye(dim, dtype=complex), hermitian=True, name="identity")

    @classmethod
    def projector(cls, vector: StateVector) -> "OperatorMatrix":
        v = vector.normalize().amplitudes
        return cls(np.outer(v, v.conj()), hermitian=True)

    @classmethod
    def zeros(cls, dim: int) -> "OperatorMatrix":
        return cls(np.zeros((dim, dim), dtype=complex), hermitian=True)


def hermitian_residual(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


def expectation(op: OperatorMatrix, psi: StateVector) -> complex:
    """<psi|A|psi>"""
    return complex(np.vdot(psi.amplitudes, op.entries @ psi.amplitudes))


def evolve_step(H: OperatorMatrix, psi: StateVector, dt: float) -> StateVector:
    """
    Apply exp(-i H dt) to psi (hbar = 1).

    :param H: hermitian Hamiltonian
    :param psi: state of matching dimension
    :param dt: finite duration, may be negative
    :return: evolved state; the norm is that of psi
    """
    if not H.hermitian:
        H = OperatorMatrix(H.entries, hermitian=True, name=H.name)
    if not np.isfinite(dt):
        raise InvalidInputError(f"evolve_step needs a finite dt, got {dt}")
    if psi.basis_dim != H.dim:
        raise InvalidInputError(f"Hamiltonian dim {H.dim} vs state dim {psi.basis_dim}")
    if dt == 0.0 or not np.any(H.entries):
        return psi
    energies, vectors = sla.eigh(H.entries)
    coeffs = vectors.conj().T @ psi.amplitudes
    return StateVector(vectors @ (np.exp(-1j * energies * dt) * coeffs), psi.labels)


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of arrays (all vectors or all matrices), left factor first."""
    return reduce(np.kron, [np.asarray(op, dtype=complex) for op in ops])


def embed(op: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    """
    Lift an operator acting on factor ``site`` of a product space to the full space.

    :param op: matrix of shape (dims[site], dims[site])
    :param site: factor index
    :param dims: factor dimensions, left to right
    """
    if np.asarray(op).shape != (dims[site], dims[site]):
        raise InvalidInputError(f"operator shape {np.asarray(op).shape} does not fit factor of dim {dims[site]}")
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[site] = np.asarray(op, dtype=complex)
    return tensor(*factors)


def random_state(dim: int, rng: np.random.Generator) -> StateVector:
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(amps).normalize()


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> OperatorMatrix:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return OperatorMatrix(scale * (a + a.conj().T) / 2.0, hermitian=True)
