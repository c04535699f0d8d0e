"""Hamiltonians, thermal states and free energies (hbar = k_B = 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidBeta, InvalidTemperatureOrder, NotUnitary
from .linalg import as_matrix, hermitian_spectrum, is_unitary


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HermitianOperator:
    """Operator ``sum_i E_i |E_i><E_i|`` stored by its eigen-decomposition.

    Eigenvalues keep the order they were given in; column ``i`` of
    ``eigenbasis`` is ``|E_i>``.
    """

    eigenvalues: np.ndarray
    eigenbasis: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
        basis = as_matrix(self.eigenbasis)
        if basis.shape != (ev.size, ev.size):
            raise DimensionMismatch(f"{ev.size} eigenvalues but eigenbasis has shape {basis.shape}")
        if not np.all(np.isfinite(ev)):
            raise ValueError("eigenvalues must be finite")
        if not is_unitary(basis, 1e-12):
            raise NotUnitary("eigenbasis is not unitary within 1e-12")
        object.__setattr__(self, "eigenvalues", _frozen(ev))
        object.__setattr__(self, "eigenbasis", _frozen(basis))

    @classmethod
    def diagonal(cls, energies) -> "HermitianOperator":
        ev = np.asarray(energies, dtype=float).reshape(-1)
        return cls(ev, np.eye(ev.size, dtype=np.complex128))

    @classmethod
    def from_matrix(cls, h) -> "HermitianOperator":
        spec = hermitian_spectrum(h)
        return cls(spec.eigenvalues, spec.eigenvectors)

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def matrix(self) -> np.ndarray:
        v = self.eigenbasis
        return (v * self.eigenvalues) @ v.conj().T

    def projector(self, i: int) -> np.ndarray:
        v = self.eigenbasis[:, i]
        return np.outer(v, v.conj())

    def diagonal_in_basis(self, rho) -> np.ndarray:
        """Populations ``<E_i|rho|E_i>`` of a state in this operator's eigenbasis."""
        v = self.eigenbasis
        return np.real(np.einsum("ji,jk,ki->i", v.conj(), as_matrix(rho), v))

    def from_populations(self, p) -> np.ndarray:
        """Density matrix ``sum_i p_i |E_i><E_i|``."""
        v = self.eigenbasis
        return (v * np.asarray(p, dtype=float)) @ v.conj().T

    def min_gap(self) -> float:
        if self.dim < 2:
            return math.inf
        return float(np.min(np.diff(np.sort(self.eigenvalues))))

    def spectral_norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def same_basis(self, other: "HermitianOperator", tol: float = 1e-10) -> bool:
        if other.dim != self.dim:
            return False
        overlap = np.abs(self.eigenbasis.conj().T @ other.eigenbasis)
        return bool(np.max(np.abs(overlap - np.eye(self.dim))) <= tol)


@dataclass(frozen=True)
class GibbsState:
    hamiltonian: HermitianOperator
    beta: float
    matrix: np.ndarray = field(repr=False)
    partition_function: float
    populations: np.ndarray
    log_partition_function: float

    @property
    def free_energy(self) -> float:
        return -self.log_partition_function / self.beta

    def mean_energy(self) -> float:
        return float(self.populations @ self.hamiltonian.eigenvalues)


def check_beta(beta: float, *, strictly_positive: bool = False) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0 or (strictly_positive and beta == 0):
        raise InvalidBeta(f"inverse temperature must be {'> 0' if strictly_positive else '>= 0'} and finite, got {beta}")
    return beta


def thermal_populations(energies, beta: float) -> tuple[np.ndarray, float]:
    """Boltzmann weights and ``log Z``, shifted by the ground energy to avoid overflow."""
    e = np.asarray(energies, dtype=float)
    e0 = float(np.min(e))
    w = np.exp(-beta * (e - e0))
    s = float(np.sum(w))
    return w / s, math.log(s) - beta * e0


def gibbs(h: HermitianOperator, beta: float) -> GibbsState:
    beta = check_beta(beta)
    p, log_z = thermal_populations(h.eigenvalues, beta)
    rho = h.from_populations(p)
    rho = 0.5 * (rho + rho.conj().T)
    with np.errstate(over="ignore"):
        z = math.exp(log_z) if log_z < 709.0 else math.inf
    return GibbsState(h, beta, _frozen(rho), z, _frozen(p), log_z)


def free_energy_difference(h0: HermitianOperator, hf: HermitianOperator, beta: float) -> float:
    """``F_f - F_0 = (1/beta) log(Z_0 / Z_f)``."""
    beta = check_beta(beta, strictly_positive=True)
    _, log_z0 = thermal_populations(h0.eigenvalues, beta)
    _, log_zf = thermal_populations(hf.eigenvalues, beta)
    return (log_z0 - log_zf) / beta


def cooling_cost(n_qubits: int, e_p: float, beta_s: float, beta_p: float) -> float:
    """Closed-form energy for cooling an ``n_qubits`` pointer from ``beta_s`` to ``beta_p``.

    Evaluates ``N (E_F - 1) [1/(exp(-beta_s E_F) + 1) - 1/(exp(-beta_s E_P) + 1)]``
    with ``E_F = E_P beta_p / beta_s`` exactly as written, energies in units of
    the system gap.  The bare ``- 1`` is kept as is even though it mixes an
    energy with a pure number; see the README.
    """
    beta_s = check_beta(beta_s, strictly_positive=True)
    beta_p = check_beta(beta_p, strictly_positive=True)
    if beta_p < beta_s:
        raise InvalidTemperatureOrder(f"pointer must be at least as cold as the system: beta_p={beta_p} < beta_s={beta_s}")
    e_f = e_p * beta_p / beta_s
    bracket = 1.0 / (math.exp(-beta_s * e_f) + 1.0) - 1.0 / (math.exp(-beta_s * e_p) + 1.0)
    return n_qubits * (e_f - 1.0) * bracket
