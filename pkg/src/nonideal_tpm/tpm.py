"""Two-point-measurement work statistics with ideal and thermal-pointer measurements.

Index conventions: ``n`` labels eigenstates of ``h0`` (first outcome), ``m``
eigenstates of ``hf`` (second outcome).  ``T[n, m]`` is the probability
``|<E_m^f| U |E_n^0>|^2`` and ``q[l, n]`` the probability that a measurement
reading ``n`` leaves the system in level ``l``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import (
    BasisMismatch,
    DimensionMismatch,
    NotTimeReversalSymmetric,
    NotUnitary,
)
from .linalg import HermitianSpectrum, as_matrix, hermitian_spectrum, is_unitary, unitary_exp
from .measurement import MeasurementChannel, check_measurement_basis
from .thermo import HermitianOperator, check_beta, gibbs

UNITARY_TOL = 1e-12
TIME_REVERSAL_TOL = 1e-10
WORK_BIN_TOL = 1e-9


@dataclass(frozen=True)
class Process:
    """Driving protocol: initial and final Hamiltonians and the unitary between them.

    ``family(t)`` optionally gives the propagator from time 0 to ``t`` for
    ``0 <= t <= t_f``, with ``family(t_f) == u``.
    """

    h0: HermitianOperator
    hf: HermitianOperator
    u: np.ndarray
    family: Optional[Callable[[float], np.ndarray]] = None
    t_f: float = 1.0

    def __post_init__(self):
        u = as_matrix(self.u)
        d = self.h0.dim
        if self.hf.dim != d or u.shape != (d, d):
            raise DimensionMismatch(f"h0 dim {d}, hf dim {self.hf.dim}, unitary shape {u.shape}")
        if not is_unitary(u, UNITARY_TOL):
            raise NotUnitary("process unitary fails U U^dagger = I within 1e-12")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if self.family is not None:
            if not is_unitary(self.family(0.0), UNITARY_TOL) or np.max(np.abs(self.family(0.0) - np.eye(d))) > UNITARY_TOL:
                raise NotUnitary("family(0) must be the identity")
            if np.max(np.abs(self.family(self.t_f) - u)) > 1e-10:
                raise NotUnitary("family(t_f) must equal the process unitary")

    @property
    def d(self) -> int:
        return self.h0.dim


@dataclass(frozen=True)
class PiecewiseFamily:
    """Propagator of a piecewise-constant Hamiltonian schedule.

    Segment ``j`` applies ``hamiltonians[j]`` for ``durations[j]``; later
    segments act on the left.
    """

    spectra: tuple
    durations: tuple

    @classmethod
    def build(cls, hamiltonians, durations) -> "PiecewiseFamily":
        spectra = tuple(h if isinstance(h, HermitianSpectrum) else hermitian_spectrum(h) for h in hamiltonians)
        durations = tuple(float(t) for t in durations)
        if len(spectra) != len(durations) or not spectra:
            raise DimensionMismatch("need one duration per Hamiltonian segment")
        if any(t < 0 for t in durations):
            raise ValueError("segment durations must be non-negative")
        return cls(spectra, durations)

    @property
    def t_f(self) -> float:
        return float(sum(self.durations))

    def __call__(self, t: float) -> np.ndarray:
        d = self.spectra[0].eigenvalues.size
        u = np.eye(d, dtype=np.complex128)
        remaining = float(t)
        for spec, dt in zip(self.spectra, self.durations):
            if remaining <= 0.0:
                break
            step = min(dt, remaining)
            u = unitary_exp(spec, step) @ u
            remaining -= step
        return u


def piecewise_process(h0: HermitianOperator, hf: HermitianOperator, hamiltonians, durations) -> Process:
    fam = PiecewiseFamily.build(hamiltonians, durations)
    return Process(h0, hf, fam(fam.t_f), fam, fam.t_f)


def fourier_unitary(basis: HermitianOperator) -> np.ndarray:
    """``(1/sqrt d) sum_{j,k} exp(-2 pi i jk/d) |E_k><E_j|`` in ``basis``."""
    d = basis.dim
    j, k = np.indices((d, d))
    f = np.exp(-2j * np.pi * j * k / d) / np.sqrt(d)
    v = basis.eigenbasis
    return v @ f @ v.conj().T


@dataclass(frozen=True)
class JointDistribution:
    p: np.ndarray
    kind: str

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def marginal_first(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def marginal_second(self) -> np.ndarray:
        return self.p.sum(axis=0)


@dataclass(frozen=True)
class WorkDistribution:
    atoms: tuple

    @property
    def values(self) -> np.ndarray:
        return np.array([w for w, _ in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])


def transition_matrix(process: Process) -> np.ndarray:
    """``T[n, m] = |<E_m^f| U |E_n^0>|^2``; doubly stochastic."""
    if not is_unitary(process.u, UNITARY_TOL):
        raise NotUnitary("process unitary fails U U^dagger = I within 1e-12")
    amp = process.hf.eigenbasis.conj().T @ process.u @ process.h0.eigenbasis
    return (np.abs(amp) ** 2).T


def _check_channel(channel: MeasurementChannel, h: HermitianOperator, which: str) -> None:
    if channel.d_s != h.dim:
        raise BasisMismatch(f"{which} channel serves d_S={channel.d_s} but the Hamiltonian has dimension {h.dim}")
    if channel.system is not None and not channel.system.same_basis(h):
        raise BasisMismatch(f"{which} channel was built on a different eigenbasis")
    check_measurement_basis(h)


def initial_populations(process: Process, beta: float) -> np.ndarray:
    return gibbs(process.h0, check_beta(beta, strictly_positive=True)).populations


def ideal_joint(process: Process, beta: float) -> JointDistribution:
    p0 = initial_populations(process, beta)
    return JointDistribution(p0[:, None] * transition_matrix(process), "ideal")


def conditional_second_outcome(process: Process, channel0: MeasurementChannel) -> np.ndarray:
    """``p(m|n) = sum_l q0[l, n] T[l, m]``."""
    _check_channel(channel0, process.h0, "first")
    return channel0.q.T @ transition_matrix(process)


def nonideal_joint(process: Process, beta: float, channel0: MeasurementChannel) -> JointDistribution:
    p0 = initial_populations(process, beta)
    return JointDistribution(p0[:, None] * conditional_second_outcome(process, channel0), "nonideal")


def work_values(h0: HermitianOperator, hf: HermitianOperator) -> np.ndarray:
    """``W[n, m] = E_m^f - E_n^0``."""
    return hf.eigenvalues[None, :] - h0.eigenvalues[:, None]


def work_distribution(joint: JointDistribution, h0: HermitianOperator, hf: HermitianOperator) -> WorkDistribution:
    """Merge outcome pairs whose work values agree within ``1e-9 * max|E|``.

    Atoms carry the probability-weighted mean of their merged values; atoms of
    zero probability are dropped.
    """
    w = work_values(h0, hf)
    if w.shape != joint.p.shape:
        raise DimensionMismatch(f"joint table {joint.p.shape} vs energies {w.shape}")
    scale = max(float(np.max(np.abs(h0.eigenvalues))), float(np.max(np.abs(hf.eigenvalues))))
    tol = WORK_BIN_TOL * scale if scale > 0 else WORK_BIN_TOL
    flat_w = w.reshape(-1)
    flat_p = joint.p.reshape(-1)
    order = np.argsort(flat_w, kind="stable")

    atoms = []
    start = 0
    while start < order.size:
        stop = start + 1
        while stop < order.size and flat_w[order[stop]] - flat_w[order[start]] <= tol:
            stop += 1
        idx = order[start:stop]
        prob = float(np.sum(flat_p[idx]))
        if prob > 0:
            atoms.append((float(flat_p[idx] @ flat_w[idx] / prob), prob))
        start = stop
    return WorkDistribution(tuple(atoms))


def mean_work(dist: WorkDistribution) -> float:
    return float(sum(w * p for w, p in dist.atoms))


def mean_work_of(joint: JointDistribution, h0: HermitianOperator, hf: HermitianOperator) -> float:
    return float(np.sum(joint.p * work_values(h0, hf)))


def ideal_energy_change(process: Process, beta: float) -> float:
    """``Tr(Hf U tau U^dagger) - Tr(H0 tau)``."""
    tau = gibbs(process.h0, check_beta(beta, strictly_positive=True)).matrix
    rho_f = process.u @ tau @ process.u.conj().T
    return float(np.real(np.trace(process.hf.matrix @ rho_f) - np.trace(process.h0.matrix @ tau)))


class WorkDecomposition(NamedTuple):
    cmax_term: float
    correction: float


def work_decomposition(process: Process, beta: float, channel0: MeasurementChannel) -> WorkDecomposition:
    """Split the non-ideal mean work into ``C_max <W>_ideal`` plus off-diagonal leakage."""
    _check_channel(channel0, process.h0, "first")
    p0 = initial_populations(process, beta)
    t = transition_matrix(process)
    w = work_values(process.h0, process.hf)
    w_ideal = float(np.sum(p0[:, None] * t * w))
    q_off = channel0.q - np.diag(np.diag(channel0.q))
    # sum over m, n, l != n of T[l, m] q[l, n] p_n W[n, m]
    correction = float(np.einsum("lm,ln,n,nm->", t, q_off, p0, w))
    return WorkDecomposition(channel0.c_max * w_ideal, correction)


def deviation_bound(process: Process, channel0: MeasurementChannel) -> float:
    """``(1 - C_max) * ||Hf||`` with the spectral norm ``max |E_m^f|``."""
    return (1.0 - channel0.c_max) * process.hf.spectral_norm()


def deviation_bound_holder(process: Process, channel0: MeasurementChannel) -> float:
    """``(1 - C_max) * (E_max^f - E_min^f)``.

    Follows from Hoelder's inequality with ``||rho~ - tau||_1 <= 2 (1 - C_max)``
    and the freedom to shift ``Hf`` by a constant (the state difference is
    traceless).  Unlike :func:`deviation_bound` it holds for every spectrum.
    """
    e = process.hf.eigenvalues
    return (1.0 - channel0.c_max) * float(np.max(e) - np.min(e))


def work_deviation(process: Process, beta: float, channel0: MeasurementChannel) -> float:
    """``Tr[U (rho~_0 - tau_0) U^dagger Hf]``, the shift of the mean work caused by the first measurement."""
    _check_channel(channel0, process.h0, "first")
    p0 = initial_populations(process, beta)
    p_tilde = channel0.q @ p0
    rho = process.h0.from_populations(p_tilde - p0)
    return float(np.real(np.trace(process.u @ rho @ process.u.conj().T @ process.hf.matrix)))


def final_populations(process: Process, beta: float, channel0: MeasurementChannel, channelf: MeasurementChannel) -> np.ndarray:
    """Populations of ``hf`` levels after the second (non-ideal) measurement."""
    _check_channel(channelf, process.hf, "second")
    pr_m = nonideal_joint(process, beta, channel0).marginal_second()
    return channelf.q @ pr_m


def energy_change_nonideal(process: Process, beta: float, channel0: MeasurementChannel, channelf: MeasurementChannel) -> float:
    """``sum_{m,n,k} qf[k, m] p(m|n) p_n (E_k^f - E_n^0)``."""
    _check_channel(channelf, process.hf, "second")
    p0 = initial_populations(process, beta)
    cond = conditional_second_outcome(process, channel0)
    ek = process.hf.eigenvalues
    en = process.h0.eigenvalues
    return float(np.einsum("km,nm,n,nk->", channelf.q, cond, p0, ek[None, :] - en[:, None]))


def energy_change_from_state(process: Process, beta: float, channel0: MeasurementChannel, channelf: MeasurementChannel) -> float:
    """``Tr(Hf rho_final) - Tr(H0 tau_0)`` with ``rho_final = sum_m Pr(m) rho_m^f``."""
    p0 = initial_populations(process, beta)
    rho_final = process.hf.from_populations(final_populations(process, beta, channel0, channelf))
    return float(np.real(np.trace(process.hf.matrix @ rho_final))) - float(p0 @ process.h0.eigenvalues)


class EnergyChangeTerms(NamedTuple):
    both_correlated: float
    one_off_diagonal: float
    both_off_diagonal: float

    @property
    def total(self) -> float:
        return self.both_correlated + self.one_off_diagonal + self.both_off_diagonal


def energy_change_terms(process: Process, beta: float, channel0: MeasurementChannel, channelf: MeasurementChannel) -> EnergyChangeTerms:
    """Energy change split by whether each measurement left the system in its read-out level.

    The first term is ``C0 * Cf * <W>_ideal``; the second collects pairs where
    exactly one measurement leaked; the third those where both did.
    """
    _check_channel(channel0, process.h0, "first")
    _check_channel(channelf, process.hf, "second")
    p0 = initial_populations(process, beta)
    t = transition_matrix(process)
    e0 = process.h0.eigenvalues
    ef = process.hf.eigenvalues
    w = work_values(process.h0, process.hf)
    q0, qf = channel0.q, channelf.q
    q0_off = q0 - np.diag(np.diag(q0))
    qf_off = qf - np.diag(np.diag(qf))
    c0, cf = channel0.c_max, channelf.c_max

    first = c0 * cf * float(np.sum(p0[:, None] * t * w))
    ek_minus_en = ef[None, :] - e0[:, None]  # [n, k]
    leak_second = float(np.einsum("n,nm,km,nk->", p0, t, qf_off, ek_minus_en))
    leak_first = float(np.einsum("n,ln,lm,nm->", p0, q0_off, t, w))
    both = float(np.einsum("n,ln,lm,km,nk->", p0, q0_off, t, qf_off, ek_minus_en))
    return EnergyChangeTerms(first, c0 * leak_second + cf * leak_first, both)


def is_time_reversal_symmetric(h: HermitianOperator, tol: float = TIME_REVERSAL_TOL) -> bool:
    m = h.matrix
    return bool(np.max(np.abs(m - m.conj())) <= tol)


def backward_process(process: Process) -> Process:
    """Time-reversed protocol with complex conjugation as the time-reversal operator.

    The backward unitary is ``conj(U^dagger) = U^T``; the backward family is
    ``s -> conj(U(t_f - s) U(t_f)^dagger)``.
    """
    for name, h in (("h0", process.h0), ("hf", process.hf)):
        if not is_time_reversal_symmetric(h):
            raise NotTimeReversalSymmetric(f"{name} is not real in the computational basis")
    u_back = process.u.T.copy()
    family = None
    if process.family is not None:
        fwd = process.family
        t_f = process.t_f
        u_tf_dag = process.u.conj().T

        def family(s: float, _fwd=fwd, _t_f=t_f, _u=u_tf_dag) -> np.ndarray:
            return np.conj(_fwd(_t_f - s) @ _u)

    return Process(process.hf, process.h0, u_back, family, process.t_f)


def final_gibbs_populations(process: Process, beta: float) -> np.ndarray:
    return gibbs(process.hf, check_beta(beta, strictly_positive=True)).populations


def backward_joint(process: Process, beta: float, channelf: MeasurementChannel) -> JointDistribution:
    """``P_B[n, m] = sum_k T_B[k, n] qf[k, m] p_m^f`` for the reversed protocol.

    ``m`` is the first backward reading (an ``hf`` level), ``n`` the second
    (an ``h0`` level), so the table is indexed like the forward one.
    """
    _check_channel(channelf, process.hf, "second")
    back = backward_process(process)
    t_back = transition_matrix(back)
    pf = final_gibbs_populations(process, beta)
    return JointDistribution(np.einsum("kn,km,m->nm", t_back, channelf.q, pf), "backward")
