"""Unbiased, maximally correlated measurements with a thermal pointer.

A pointer of dimension ``d_P = lam * d_S`` starts in its Gibbs state.  Its
thermal weights, sorted from largest to smallest, are cut into ``d_S``
consecutive groups of ``lam``; group ``g`` has weights ``a^(g)`` and total
``A_g``.  An assignment matrix ``pi`` says which group ends up in block
``(system level l, pointer outcome n)`` of the post-measurement state, so
the conditional probability of finding the system in ``l`` after reading
``n`` is ``q[l, n] = A_{pi[l, n]}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    InvalidAssignment,
    NotNormalized,
    OutcomeOutOfRange,
)
from .linalg import as_matrix, kron
from .thermo import HermitianOperator, check_beta, thermal_populations

DEGENERACY_GAP = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PointerModel:
    """Thermal pointer with ``d_S`` outcome subspaces of ``lam`` eigenstates each.

    ``outcome_subspaces[n]`` lists the pointer eigenstate indices spanning
    outcome ``n``.  By default outcome ``n`` gets the eigenstates ranked
    ``n*lam .. (n+1)*lam - 1`` in ascending energy.
    """

    h_p: HermitianOperator
    beta_p: float
    d_s: int
    outcome_subspaces: Optional[tuple] = None

    def __post_init__(self):
        check_beta(self.beta_p)
        d_p = self.h_p.dim
        if self.d_s < 2 or d_p % self.d_s != 0:
            raise DimensionMismatch(f"pointer dimension {d_p} is not a multiple of d_S={self.d_s}")
        lam = d_p // self.d_s
        if self.outcome_subspaces is None:
            order = self.energy_order
            subspaces = tuple(tuple(int(k) for k in order[n * lam:(n + 1) * lam]) for n in range(self.d_s))
        else:
            subspaces = tuple(tuple(int(k) for k in block) for block in self.outcome_subspaces)
            flat = sorted(k for block in subspaces for k in block)
            if len(subspaces) != self.d_s or any(len(b) != lam for b in subspaces) or flat != list(range(d_p)):
                raise DimensionMismatch("outcome subspaces must partition the pointer levels into d_S blocks of equal size")
        object.__setattr__(self, "outcome_subspaces", subspaces)

    @classmethod
    def qubit_register(cls, n_qubits: int, e_p: float, beta_p: float, d_s: int = 2) -> "PointerModel":
        """``n_qubits`` non-interacting qubits of gap ``e_p``; level ``k`` has energy ``e_p * popcount(k)``."""
        energies = [e_p * bin(k).count("1") for k in range(2 ** n_qubits)]
        return cls(HermitianOperator.diagonal(energies), beta_p, d_s)

    @classmethod
    def from_energies(cls, energies, beta_p: float, d_s: int, outcome_subspaces=None) -> "PointerModel":
        return cls(HermitianOperator.diagonal(energies), beta_p, d_s, outcome_subspaces)

    @property
    def d_p(self) -> int:
        return self.h_p.dim

    @property
    def lam(self) -> int:
        return self.d_p // self.d_s

    @property
    def energy_order(self) -> np.ndarray:
        """Pointer level indices by ascending energy (stable, so ties keep index order)."""
        return np.argsort(self.h_p.eigenvalues, kind="stable")

    @property
    def populations(self) -> np.ndarray:
        return thermal_populations(self.h_p.eigenvalues, self.beta_p)[0]

    @property
    def thermal_matrix(self) -> np.ndarray:
        return self.h_p.from_populations(self.populations)

    def sorted_subspace(self, n: int) -> list:
        """Levels of outcome ``n`` in ascending energy."""
        e = self.h_p.eigenvalues
        return sorted(self.outcome_subspaces[n], key=lambda k: e[k])

    def outcome_projector(self, n: int) -> np.ndarray:
        return sum(self.h_p.projector(k) for k in self.outcome_subspaces[n])


@dataclass(frozen=True)
class AssignmentMatrix:
    entries: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.entries)
        if pi.ndim != 2 or pi.shape[0] != pi.shape[1] or pi.shape[0] < 2:
            raise InvalidAssignment(f"assignment must be a square matrix of size >= 2, got shape {pi.shape}")
        if not np.all(np.equal(np.mod(pi, 1), 0)):
            raise InvalidAssignment("assignment entries must be integers")
        pi = pi.astype(np.int64)
        d = pi.shape[0]
        target = list(range(d))
        for j in range(d):
            if sorted(pi[:, j].tolist()) != target:
                raise InvalidAssignment(f"column {j} is not a permutation of 0..{d - 1}")
        if np.any(np.diag(pi) != 0):
            raise InvalidAssignment("diagonal entries must be 0 (maximal correlation)")
        object.__setattr__(self, "entries", _frozen(pi))

    @property
    def d(self) -> int:
        return int(self.entries.shape[0])

    @property
    def latin_square(self) -> bool:
        target = list(range(self.d))
        return all(sorted(row.tolist()) == target for row in self.entries)


def assignment_minimal_energy(d_s: int) -> AssignmentMatrix:
    """Lower-weight groups fill the upper rows: ``pi[i, j] = i + 1`` above the diagonal, ``i`` below."""
    if d_s < 2:
        raise InvalidAssignment("d_s must be >= 2")
    i, j = np.indices((d_s, d_s))
    return AssignmentMatrix(np.where(i < j, i + 1, np.where(i > j, i, 0)))


def assignment_min_invasive(d_s: int) -> AssignmentMatrix:
    """Cyclic Latin square ``pi[i, j] = (i - j) mod d_s``."""
    if d_s < 2:
        raise InvalidAssignment("d_s must be >= 2")
    i, j = np.indices((d_s, d_s))
    return AssignmentMatrix((i - j) % d_s)


def group_weights(pointer: PointerModel) -> np.ndarray:
    """``A_g``: totals of consecutive ``lam``-groups of the sorted thermal weights."""
    return np.array([float(np.sum(g)) for g in group_members(pointer)])


def group_members(pointer: PointerModel) -> list:
    """``a^(g)`` for each group, each listed from largest to smallest weight."""
    tau = pointer.populations[pointer.energy_order]
    lam = pointer.lam
    return [tau[g * lam:(g + 1) * lam] for g in range(pointer.d_s)]


@dataclass(frozen=True)
class MeasurementChannel:
    pointer: PointerModel
    pi: AssignmentMatrix
    group_weights: np.ndarray
    q: np.ndarray
    c_max: float
    system: Optional[HermitianOperator] = None

    @property
    def d_s(self) -> int:
        return self.pi.d

    def conditional_populations(self, n: int) -> np.ndarray:
        if not 0 <= n < self.d_s:
            raise OutcomeOutOfRange(f"outcome {n} outside 0..{self.d_s - 1}")
        return self.q[:, n]


def check_measurement_basis(h: HermitianOperator) -> None:
    if h.min_gap() <= DEGENERACY_GAP:
        raise DegenerateSpectrum(f"measured Hamiltonian has a level gap {h.min_gap():.3e} <= {DEGENERACY_GAP}")


def build_channel(pointer: PointerModel, pi: AssignmentMatrix, system: Optional[HermitianOperator] = None) -> MeasurementChannel:
    """Conditional-probability channel of a UMC measurement.

    ``system``, when given, pins the channel to that Hamiltonian's eigenbasis;
    the TPM routines then refuse to pair it with a different basis.
    """
    if not isinstance(pi, AssignmentMatrix):
        pi = AssignmentMatrix(pi)
    if pi.d != pointer.d_s:
        raise InvalidAssignment(f"assignment is {pi.d}x{pi.d} but the pointer serves d_S={pointer.d_s}")
    if system is not None:
        if system.dim != pi.d:
            raise DimensionMismatch(f"system dimension {system.dim} vs d_S={pi.d}")
        check_measurement_basis(system)
    a = group_weights(pointer)
    q = a[pi.entries]
    return MeasurementChannel(pointer, pi, _frozen(a), _frozen(q), float(a[0]), system)


def conditional_state(channel: MeasurementChannel, n: int, basis: HermitianOperator) -> np.ndarray:
    """System state after reading outcome ``n``: ``sum_l q[l, n] |E_l><E_l|``."""
    if basis.dim != channel.d_s:
        raise DimensionMismatch(f"basis dimension {basis.dim} vs d_S={channel.d_s}")
    return basis.from_populations(channel.conditional_populations(n))


@dataclass(frozen=True)
class JointPostState:
    """System-pointer state after the measurement interaction.

    ``matrix`` is written in the computational basis of ``system (x) pointer``.
    ``block_map[(i, n)]`` holds the diagonal weights found on system level
    ``i`` and the (energy-sorted) levels of outcome ``n``.
    """

    matrix: np.ndarray = field(repr=False)
    block_map: dict
    pointer: PointerModel
    system: HermitianOperator

    def product_basis(self) -> np.ndarray:
        return kron(self.system.eigenbasis, self.pointer.h_p.eigenbasis)

    def eigen_diagonal(self) -> np.ndarray:
        """Diagonal of ``matrix`` in the product energy eigenbasis."""
        b = self.product_basis()
        return np.real(np.einsum("ji,jk,ki->i", b.conj(), self.matrix, b))

    @classmethod
    def from_matrix(cls, rho_sp, pointer: PointerModel, system: HermitianOperator) -> "JointPostState":
        rho = as_matrix(rho_sp)
        d_s, d_p = system.dim, pointer.d_p
        if rho.shape != (d_s * d_p, d_s * d_p):
            raise DimensionMismatch(f"expected {(d_s * d_p,) * 2}, got {rho.shape}")
        b = kron(system.eigenbasis, pointer.h_p.eigenbasis)
        diag = np.real(np.einsum("ji,jk,ki->i", b.conj(), rho, b)).reshape(d_s, d_p)
        blocks = {
            (i, n): diag[i, pointer.sorted_subspace(n)].copy()
            for i in range(d_s)
            for n in range(pointer.d_s)
        }
        return cls(rho, blocks, pointer, system)


def _default_system(d_s: int, system: Optional[HermitianOperator]) -> HermitianOperator:
    if system is None:
        return HermitianOperator.diagonal(np.arange(d_s, dtype=float))
    if system.dim != d_s:
        raise DimensionMismatch(f"system dimension {system.dim} vs d_S={d_s}")
    return system


def build_joint_post_state(p, pointer: PointerModel, pi: AssignmentMatrix, system: Optional[HermitianOperator] = None) -> JointPostState:
    """Block-formula post-measurement state for a system diagonal in the measured basis.

    Block ``(i, n)`` receives ``p_n * a^(pi[i, n])``, largest weight on the
    lowest-energy level of outcome ``n``.  Without ``system`` the system
    eigenbasis is taken to be the computational basis.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if not isinstance(pi, AssignmentMatrix):
        pi = AssignmentMatrix(pi)
    d_s = pi.d
    if p.size != d_s or pi.d != pointer.d_s:
        raise DimensionMismatch(f"populations of length {p.size}, assignment {pi.d}, pointer d_S={pointer.d_s}")
    if abs(float(np.sum(p)) - 1.0) > 1e-12 or np.any(p < -1e-14):
        raise NotNormalized(f"populations must be a probability vector (sum={np.sum(p):.15g})")
    system = _default_system(d_s, system)
    groups = group_members(pointer)
    d_p = pointer.d_p

    diag = np.zeros((d_s, d_p))
    blocks = {}
    for i in range(d_s):
        for n in range(d_s):
            w = p[n] * groups[pi.entries[i, n]]
            diag[i, pointer.sorted_subspace(n)] = w
            blocks[(i, n)] = w
    b = kron(system.eigenbasis, pointer.h_p.eigenbasis)
    rho = (b * diag.reshape(-1)) @ b.conj().T
    return JointPostState(0.5 * (rho + rho.conj().T), blocks, pointer, system)


def measurement_permutation(pointer: PointerModel, pi: AssignmentMatrix) -> np.ndarray:
    """Index map of ``V . U~`` on product eigenstates: ``dest[n * d_P + k]``.

    ``U~`` acts on system level ``n`` by moving the ``r``-th member of group
    ``pi[i, n]`` onto the ``r``-th level of outcome ``i``; ``V`` then swaps
    ``|n>|psi^(i)_r>`` with ``|i>|psi^(n)_r>``.
    """
    if not isinstance(pi, AssignmentMatrix):
        pi = AssignmentMatrix(pi)
    if pi.d != pointer.d_s:
        raise InvalidAssignment(f"assignment is {pi.d}x{pi.d} but the pointer serves d_S={pointer.d_s}")
    d_s, d_p, lam = pi.d, pointer.d_p, pointer.lam
    order = pointer.energy_order
    sub = [pointer.sorted_subspace(n) for n in range(d_s)]
    dest = np.empty(d_s * d_p, dtype=np.int64)
    for n in range(d_s):
        for i in range(d_s):
            g = pi.entries[i, n]
            for r in range(lam):
                src = n * d_p + int(order[g * lam + r])
                dest[src] = i * d_p + sub[n][r]
    return dest


def build_measurement_unitary(pointer: PointerModel, pi: AssignmentMatrix, system: Optional[HermitianOperator] = None) -> np.ndarray:
    """Explicit system-pointer unitary ``U_meas = V . U~`` in the computational basis."""
    dest = measurement_permutation(pointer, pi)
    d_s = pointer.d_s
    system = _default_system(d_s, system)
    dim = dest.size
    perm = np.zeros((dim, dim), dtype=np.complex128)
    perm[dest, np.arange(dim)] = 1.0
    b = kron(system.eigenbasis, pointer.h_p.eigenbasis)
    return b @ perm @ b.conj().T


def apply_measurement(rho_s, system: HermitianOperator, pointer: PointerModel, pi: AssignmentMatrix) -> JointPostState:
    """``U_meas (rho_s (x) tau_P) U_meas^dagger`` for an arbitrary system state."""
    rho_s = as_matrix(rho_s)
    if rho_s.shape != (system.dim, system.dim):
        raise DimensionMismatch(f"state shape {rho_s.shape} vs system dimension {system.dim}")
    u = build_measurement_unitary(pointer, pi, system)
    rho = u @ kron(rho_s, pointer.thermal_matrix) @ u.conj().T
    return JointPostState.from_matrix(0.5 * (rho + rho.conj().T), pointer, system)


def _local_energy(system: HermitianOperator, pointer: PointerModel) -> np.ndarray:
    return kron(system.matrix, np.eye(pointer.d_p)) + kron(np.eye(system.dim), pointer.h_p.matrix)


def measurement_energy_cost(rho_s, h_s: HermitianOperator, pointer: PointerModel, pi: AssignmentMatrix) -> float:
    """``Tr[(H_S + H_P)(rho~_SP - rho_S (x) tau_P)]`` through the explicit unitary."""
    check_measurement_basis(h_s)
    rho_s = as_matrix(rho_s)
    joint = apply_measurement(rho_s, h_s, pointer, pi)
    before = kron(rho_s, pointer.thermal_matrix)
    h = _local_energy(h_s, pointer)
    return float(np.real(np.trace(h @ (joint.matrix - before))))


def measurement_energy_cost_blocks(p, h_s: HermitianOperator, pointer: PointerModel, pi: AssignmentMatrix) -> float:
    """Same cost from the block formula, for a state with populations ``p`` in ``h_s``'s basis."""
    check_measurement_basis(h_s)
    p = np.asarray(p, dtype=float)
    joint = build_joint_post_state(p, pointer, pi, h_s)
    e_s = h_s.eigenvalues
    e_p = pointer.h_p.eigenvalues
    after = 0.0
    for (i, n), w in joint.block_map.items():
        levels = pointer.sorted_subspace(n)
        after += float(np.sum(w * (e_s[i] + e_p[levels])))
    before = float(p @ e_s) + float(pointer.populations @ e_p)
    return after - before


def correlation_value(joint: JointPostState) -> float:
    """Probability that system level and pointer outcome agree: ``sum_i Tr[(|E_i><E_i| (x) Pi_i) rho~]``."""
    diag = joint.eigen_diagonal().reshape(joint.system.dim, joint.pointer.d_p)
    return float(sum(np.sum(diag[i, list(joint.pointer.outcome_subspaces[i])]) for i in range(joint.system.dim)))


def outcome_probabilities(joint: JointPostState) -> np.ndarray:
    """``Tr[(1 (x) Pi_n) rho~]`` for every outcome."""
    diag = joint.eigen_diagonal().reshape(joint.system.dim, joint.pointer.d_p)
    return np.array([float(np.sum(diag[:, list(b)])) for b in joint.pointer.outcome_subspaces])
