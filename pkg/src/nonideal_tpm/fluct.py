"""Fluctuation theorems and dissipation identities under non-ideal energy measurements."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ChiZero, MissingTimeFamily, NonRealResult, SupportViolation
from .linalg import binary_entropy, cross_log_trace, relative_entropy, vn_entropy
from .measurement import MeasurementChannel
from .thermo import check_beta, free_energy_difference, gibbs
from .tpm import (
    Process,
    _check_channel,
    backward_joint,
    backward_process,
    final_gibbs_populations,
    initial_populations,
    mean_work_of,
    nonideal_joint,
    transition_matrix,
    work_values,
)

NEGLIGIBLE_PROB = 1e-15


def characteristic_function(process: Process, beta: float, channel0: MeasurementChannel, u: complex, form: str = "sum") -> complex:
    """``G(u) = sum_{n,m} p(n, m) exp(i u (E_m^f - E_n^0))``.

    ``form="operator"`` evaluates ``Tr[exp(i u Hf) U sigma(u) U^dagger]`` with
    ``sigma(u) = sum_n p_n exp(-i u E_n^0) rho_n`` instead.
    """
    u = complex(u)
    if form == "sum":
        joint = nonideal_joint(process, beta, channel0)
        return complex(np.sum(joint.p * np.exp(1j * u * work_values(process.h0, process.hf))))
    if form != "operator":
        raise ValueError(f"unknown form {form!r}")
    _check_channel(channel0, process.h0, "first")
    p0 = initial_populations(process, beta)
    weights = channel0.q @ (p0 * np.exp(-1j * u * process.h0.eigenvalues))
    v0 = process.h0.eigenbasis
    sigma = (v0 * weights) @ v0.conj().T
    vf = process.hf.eigenbasis
    phase = (vf * np.exp(1j * u * process.hf.eigenvalues)) @ vf.conj().T
    return complex(np.trace(phase @ process.u @ sigma @ process.u.conj().T))


def jarzynski_functional(process: Process, beta: float, channel0: MeasurementChannel) -> float:
    """``<exp(-beta W)>`` over the non-ideal work distribution."""
    beta = check_beta(beta, strictly_positive=True)
    g = characteristic_function(process, beta, channel0, 1j * beta)
    if abs(g.imag) > 1e-10:
        raise NonRealResult(f"G(i beta) has imaginary part {g.imag:.3e}")
    return g.real


def chi(process: Process, beta: float, channel0: MeasurementChannel) -> float:
    """``(1/Z_f) sum_{n,m,l} exp(-beta E_m^f) q[l, n] T[l, m]``; equals 1 for doubly stochastic ``q``."""
    _check_channel(channel0, process.h0, "first")
    pf = final_gibbs_populations(process, beta)
    row_sums = channel0.q.sum(axis=1)
    return float(row_sums @ transition_matrix(process) @ pf)


class SecondLawBound(NamedTuple):
    bound: float
    holds: bool


def second_law_bound(process: Process, beta: float, channel0: MeasurementChannel) -> SecondLawBound:
    """``<W> >= Delta F - (1/beta) log chi``."""
    beta = check_beta(beta, strictly_positive=True)
    c = chi(process, beta, channel0)
    if c < 1e-300:
        raise ChiZero(f"chi = {c:.3e}")
    bound = free_energy_difference(process.h0, process.hf, beta) - math.log(c) / beta
    w = mean_work_of(nonideal_joint(process, beta, channel0), process.h0, process.hf)
    return SecondLawBound(bound, bool(w >= bound - 1e-10))


class CrooksEntry(NamedTuple):
    n: int
    m: int
    work: float
    p_forward: float
    p_backward: float
    sigma: float
    gamma: float
    crooks_ratio: float


@dataclass(frozen=True)
class CrooksReport:
    """Pairwise comparison of forward and backward TPM statistics.

    ``sigma = -log(P_B / P_F)``, ``gamma = log(P_F(m|n) / P_B(n|m))`` and
    ``crooks_ratio = P_B exp(beta (W - Delta F)) / P_F``, which equals
    ``exp(-gamma)``.  Pairs where both probabilities are below ``1e-15`` are
    left out.  ``mean_sigma`` is infinite when some pair has ``P_F > 0 = P_B``.
    """

    table: tuple
    mean_sigma: float
    max_relative_violation: float
    modified_relation_residual: float
    delta_f: float

    @property
    def divergent(self) -> bool:
        return math.isinf(self.mean_sigma)


def crooks_report(process: Process, beta: float, channel0: MeasurementChannel, channelf: MeasurementChannel, strict: bool = False) -> CrooksReport:
    """Forward/backward comparison; ``strict`` raises instead of reporting a divergent entropy production."""
    beta = check_beta(beta, strictly_positive=True)
    pf_joint = nonideal_joint(process, beta, channel0).p
    pb_joint = backward_joint(process, beta, channelf).p
    p0 = initial_populations(process, beta)
    pf = final_gibbs_populations(process, beta)
    dF = free_energy_difference(process.h0, process.hf, beta)
    w = work_values(process.h0, process.hf)

    rows = []
    mean_sigma = 0.0
    worst = 0.0
    residual = 0.0
    d = process.d
    for n in range(d):
        for m in range(d):
            a, b = float(pf_joint[n, m]), float(pb_joint[n, m])
            if a < NEGLIGIBLE_PROB and b < NEGLIGIBLE_PROB:
                continue
            if b < NEGLIGIBLE_PROB:
                if strict:
                    raise SupportViolation(f"P_B({n},{m}) = 0 while P_F({n},{m}) = {a:.3e}")
                rows.append(CrooksEntry(n, m, float(w[n, m]), a, b, math.inf, math.inf, 0.0))
                mean_sigma = math.inf
                worst = max(worst, 1.0)
                continue
            if a < NEGLIGIBLE_PROB:
                rows.append(CrooksEntry(n, m, float(w[n, m]), a, b, -math.inf, -math.inf, math.inf))
                worst = math.inf
                continue
            sigma = -math.log(b / a)
            gamma = math.log((a / p0[n]) / (b / pf[m]))
            ratio = b * math.exp(beta * (w[n, m] - dF)) / a
            rows.append(CrooksEntry(n, m, float(w[n, m]), a, b, sigma, gamma, ratio))
            mean_sigma += a * sigma
            worst = max(worst, abs(ratio - 1.0))
            # P_B = exp(-beta (W - dF)) * exp(-gamma) P_F, pair by pair
            corrected = math.exp(-beta * (w[n, m] - dF)) * math.exp(-gamma) * a
            residual = max(residual, abs(b - corrected))
    return CrooksReport(tuple(rows), mean_sigma, worst, residual, dF)


def classical_relative_entropy(p, q) -> float:
    """``sum p log(p/q)`` over ``p > 1e-15``; infinite when ``q`` vanishes there."""
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    total = 0.0
    for a, b in zip(p, q):
        if a < NEGLIGIBLE_PROB:
            continue
        if b < NEGLIGIBLE_PROB:
            return math.inf
        total += a * math.log(a / b)
    return total


@dataclass(frozen=True)
class DissipationReport:
    """Terms of ``beta (<W> - Delta F) = Delta S_0 + Delta D_f + D(...)``.

    ``rel_ent_final`` is ``D(rho~_f || tau_f)``; ``rel_ent_fb`` is the
    forward/backward relative entropy.  Terms that do not enter a given
    identity are reported as 0.
    """

    lhs: float
    delta_s0: float
    rel_ent_final: float
    delta_df: float
    rel_ent_fb: float
    residual: float


def disturbed_initial_state(process: Process, beta: float, channel0: MeasurementChannel) -> np.ndarray:
    """``rho~_0 = sum_n p_n rho_n``, the unconditional state after the first measurement."""
    _check_channel(channel0, process.h0, "first")
    p0 = initial_populations(process, beta)
    return process.h0.from_populations(channel0.q @ p0)


def initial_entropy_change(process: Process, beta: float, channel0: MeasurementChannel) -> float:
    """``S(rho~_0) - S(tau_0)``."""
    tau0 = gibbs(process.h0, beta).matrix
    return vn_entropy(disturbed_initial_state(process, beta, channel0)) - vn_entropy(tau0)


def _lhs(process: Process, beta: float, channel0: MeasurementChannel) -> float:
    w = mean_work_of(nonideal_joint(process, beta, channel0), process.h0, process.hf)
    return beta * (w - free_energy_difference(process.h0, process.hf, beta))


def dissipation_identity(process: Process, beta: float, channel0: MeasurementChannel) -> DissipationReport:
    """``beta (<W> - Delta F) = Delta S_0 + D(rho~_f || tau_f)``."""
    beta = check_beta(beta, strictly_positive=True)
    lhs = _lhs(process, beta, channel0)
    rho0 = disturbed_initial_state(process, beta, channel0)
    rho_f = process.u @ rho0 @ process.u.conj().T
    ds0 = initial_entropy_change(process, beta, channel0)
    d_final = relative_entropy(rho_f, gibbs(process.hf, beta).matrix)
    return DissipationReport(lhs, ds0, d_final, 0.0, 0.0, abs(lhs - ds0 - d_final))


class FannesCheck(NamedTuple):
    delta_s0: float
    bound: float
    holds: bool


def fannes_bound(channel0: MeasurementChannel, process: Process, beta: float) -> FannesCheck:
    """``Delta S_0 <= (1 - C_max) log(d_S - 1) + H_2(C_max)``."""
    beta = check_beta(beta, strictly_positive=True)
    ds0 = initial_entropy_change(process, beta, channel0)
    c = channel0.c_max
    d = channel0.d_s
    bound = (1.0 - c) * math.log(d - 1) + binary_entropy(c)
    return FannesCheck(ds0, bound, bool(ds0 <= bound + 1e-10))


def backward_initial_state(process: Process, beta: float, channelf: MeasurementChannel) -> np.ndarray:
    """``rho_B^f = sum_m p_m^f rho_m^f``: thermal ``hf`` state after the backward first measurement."""
    _check_channel(channelf, process.hf, "second")
    pf = final_gibbs_populations(process, beta)
    return process.hf.from_populations(channelf.q @ pf)


def _check_time(process: Process, t: float) -> float:
    if process.family is None:
        raise MissingTimeFamily("this identity needs intermediate-time propagators")
    t = float(t)
    if not -1e-12 <= t <= process.t_f + 1e-12:
        raise ValueError(f"t={t} outside [0, {process.t_f}]")
    return min(max(t, 0.0), process.t_f)


def _forward_backward_distance(process: Process, rho0: np.ndarray, rho_b_f: np.ndarray, t: float) -> float:
    """``D(rho_F(t) || conj(rho_B(t_f - t)))``."""
    u_t = process.family(t)
    rho_fwd = u_t @ rho0 @ u_t.conj().T
    back = backward_process(process)
    v = back.family(process.t_f - t)
    rho_bwd = v @ rho_b_f @ v.conj().T
    return relative_entropy(rho_fwd, np.conj(rho_bwd))


def kpv_extended(process: Process, beta: float, channel0: MeasurementChannel, channelf: MeasurementChannel, t: float) -> DissipationReport:
    """``beta (<W> - Delta F) = Delta S_0 + Delta D_f + D(rho_F(t) || Theta^dag rho_B(t_f - t) Theta)``.

    ``Delta D_f = Tr[rho~_f (log rho_B^f - log tau_f)]`` accounts for the
    backward protocol starting from the disturbed rather than the thermal
    final state.
    """
    beta = check_beta(beta, strictly_positive=True)
    t = _check_time(process, t)
    lhs = _lhs(process, beta, channel0)
    rho0 = disturbed_initial_state(process, beta, channel0)
    rho_f = process.u @ rho0 @ process.u.conj().T
    rho_b_f = backward_initial_state(process, beta, channelf)
    tau_f = gibbs(process.hf, beta).matrix
    ds0 = initial_entropy_change(process, beta, channel0)
    ddf = cross_log_trace(rho_f, rho_b_f) - cross_log_trace(rho_f, tau_f)
    d_fb = _forward_backward_distance(process, rho0, rho_b_f, t)
    return DissipationReport(lhs, ds0, 0.0, ddf, d_fb, abs(lhs - ds0 - ddf - d_fb))


def kpv_ideal(process: Process, beta: float, t: float) -> DissipationReport:
    """Ideal-measurement case: ``beta (<W> - Delta F) = D(rho_F(t) || Theta^dag rho_B(t_f - t) Theta)``."""
    beta = check_beta(beta, strictly_positive=True)
    t = _check_time(process, t)
    tau0 = gibbs(process.h0, beta).matrix
    tau_f = gibbs(process.hf, beta).matrix
    rho_f = process.u @ tau0 @ process.u.conj().T
    w = float(np.real(np.trace(process.hf.matrix @ rho_f) - np.trace(process.h0.matrix @ tau0)))
    lhs = beta * (w - free_energy_difference(process.h0, process.hf, beta))
    d_fb = _forward_backward_distance(process, tau0, tau_f, t)
    return DissipationReport(lhs, 0.0, 0.0, 0.0, d_fb, abs(lhs - d_fb))
