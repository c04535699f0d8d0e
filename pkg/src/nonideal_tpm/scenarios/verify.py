"""Invariant suite behind ``verify``: each check returns a :class:`CheckResult`."""

from __future__ import annotations

import math

import numpy as np

from ..ensembles import random_instance, random_pointer, random_real_hamiltonian, random_state
from ..fluct import (
    chi,
    classical_relative_entropy,
    crooks_report,
    dissipation_identity,
    fannes_bound,
    jarzynski_functional,
    kpv_extended,
    kpv_ideal,
)
from ..linalg import trace_distance
from ..measurement import (
    PointerModel,
    apply_measurement,
    assignment_min_invasive,
    assignment_minimal_energy,
    build_channel,
    build_joint_post_state,
    build_measurement_unitary,
    conditional_state,
    correlation_value,
    measurement_energy_cost,
    measurement_energy_cost_blocks,
    outcome_probabilities,
)
from ..thermo import free_energy_difference, gibbs
from ..tpm import (
    backward_joint,
    deviation_bound,
    deviation_bound_holder,
    ideal_energy_change,
    mean_work_of,
    nonideal_joint,
)
from .csvout import CheckResult
from .montecarlo import monte_carlo_tpm
from .pipelines import reproduce_fig2, reproduce_figA3
from .rabi import rabi_process

DIMS = (2, 3, 4)


def _instances(seed: int, count: int, kind: str = "random", dims=DIMS, lam: int = 2):
    rng = np.random.default_rng(seed)
    return [random_instance(rng, dims[i % len(dims)], lam, kind) for i in range(count)]


def check_figures() -> list:
    return list(reproduce_fig2().checks) + list(reproduce_figA3().checks)


def check_jarzynski(count: int, seed: int) -> list:
    worst_id = 0.0
    for ins in _instances(seed, count):
        p, b, c0 = ins.process, ins.beta, ins.channel0
        target = chi(p, b, c0) * math.exp(-b * free_energy_difference(p.h0, p.hf, b))
        worst_id = max(worst_id, abs(jarzynski_functional(p, b, c0) - target))
    worst_mi = 0.0
    for ins in _instances(seed + 1, count, "min_invasive"):
        p, b, c0 = ins.process, ins.beta, ins.channel0
        worst_mi = max(worst_mi, abs(jarzynski_functional(p, b, c0) - math.exp(-b * free_energy_difference(p.h0, p.hf, b))))
    return [
        CheckResult("G(i beta) = chi exp(-beta dF)", worst_id < 1e-12, f"max residual {worst_id:.3e} over {count}"),
        CheckResult("Jarzynski exact for Latin-square channels", worst_mi < 1e-12, f"max residual {worst_mi:.3e} over {count}"),
    ]


def check_deviation_bound(count: int, seed: int) -> tuple:
    """Returns ``(gating checks, notes)``; the ``(1 - C) ||Hf||`` form is reported, not gated."""
    worst = 0.0
    violations = 0
    for ins in _instances(seed, count):
        p, b, c0 = ins.process, ins.beta, ins.channel0
        dev = abs(mean_work_of(nonideal_joint(p, b, c0), p.h0, p.hf) - ideal_energy_change(p, b))
        worst = max(worst, dev - deviation_bound_holder(p, c0))
        violations += dev > deviation_bound(p, c0) + 1e-12
    checks = [CheckResult("|dW| <= (1 - C_max)(E_max - E_min)", worst <= 1e-12, f"max excess {worst:.3e} over {count}")]
    notes = [f"|dW| <= (1 - C_max)||Hf||_spectral violated on {violations}/{count} instances (see README)"]
    return checks, notes


def check_channels(seed: int) -> list:
    rng = np.random.default_rng(seed)
    worst_col = worst_diag = worst_td = worst_row = 0.0
    for d in DIMS:
        for lam in (1, 2, 3):
            h = random_real_hamiltonian(rng, d)
            pointer = random_pointer(rng, d, lam)
            for pi in (assignment_minimal_energy(d), assignment_min_invasive(d)):
                ch = build_channel(pointer, pi, h)
                worst_col = max(worst_col, float(np.max(np.abs(ch.q.sum(axis=0) - 1))))
                worst_diag = max(worst_diag, float(np.max(np.abs(np.diag(ch.q) - ch.c_max))))
                for n in range(d):
                    worst_td = max(worst_td, abs(trace_distance(conditional_state(ch, n, h), h.projector(n)) - (1 - ch.c_max)))
                if pi.latin_square:
                    worst_row = max(worst_row, float(np.max(np.abs(ch.q.sum(axis=1) - 1))))
    return [
        CheckResult("q columns sum to 1", worst_col < 1e-13, f"{worst_col:.3e}"),
        CheckResult("q[n, n] = C_max", worst_diag == 0.0, f"{worst_diag:.3e}"),
        CheckResult("D(rho_n, |E_n><E_n|) = 1 - C_max", worst_td < 1e-12, f"{worst_td:.3e}"),
        CheckResult("Latin-square q is doubly stochastic", worst_row < 1e-13, f"{worst_row:.3e}"),
    ]


def check_measurement_unitary(count: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    worst_u = worst_bias = worst_paths = 0.0
    for i in range(count):
        d = (2, 3)[i % 2]
        lam = (2, 4)[(i // 2) % 2]
        h = random_real_hamiltonian(rng, d)
        pointer = random_pointer(rng, d, lam)
        pi = assignment_minimal_energy(d) if i % 3 else assignment_min_invasive(d)
        u = build_measurement_unitary(pointer, pi, h)
        worst_u = max(worst_u, float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))))
        rho = random_state(rng, d)
        probs = outcome_probabilities(apply_measurement(rho, h, pointer, pi))
        worst_bias = max(worst_bias, float(np.max(np.abs(probs - h.diagonal_in_basis(rho)))))
        tau = gibbs(h, float(rng.uniform(0.1, 2.0)))
        explicit = apply_measurement(tau.matrix, h, pointer, pi)
        block = build_joint_post_state(tau.populations, pointer, pi, h)
        worst_paths = max(
            worst_paths,
            float(np.max(np.abs(explicit.eigen_diagonal() - block.eigen_diagonal()))),
            abs(correlation_value(explicit) - correlation_value(block)),
            abs(measurement_energy_cost(tau.matrix, h, pointer, pi) - measurement_energy_cost_blocks(tau.populations, h, pointer, pi)),
        )
    return [
        CheckResult("U_meas unitary", worst_u < 1e-12, f"{worst_u:.3e}"),
        CheckResult("U_meas unbiased on random states", worst_bias < 1e-12, f"{worst_bias:.3e}"),
        CheckResult("explicit and block paths agree", worst_paths < 1e-12, f"{worst_paths:.3e}"),
    ]


def check_dissipation(count: int, seed: int) -> list:
    worst16 = worst19 = worst17 = 0.0
    for ins in _instances(seed, count, dims=(2, 3)):
        p, b, c0, cf = ins.process, ins.beta, ins.channel0, ins.channelf
        worst16 = max(worst16, dissipation_identity(p, b, c0).residual)
        for frac in (0.0, 1 / 3, 0.5, 2 / 3, 1.0):
            t = frac * p.t_f
            worst19 = max(worst19, kpv_extended(p, b, c0, cf, t).residual)
            worst17 = max(worst17, kpv_ideal(p, b, t).residual)
    return [
        CheckResult("beta(<W> - dF) = dS0 + D(rho~f||tau_f)", worst16 < 1e-10, f"{worst16:.3e}"),
        CheckResult("extended forward/backward identity", worst19 < 1e-10, f"{worst19:.3e}"),
        CheckResult("ideal forward/backward identity", worst17 < 1e-10, f"{worst17:.3e}"),
    ]


def check_crooks(seed: int) -> list:
    rng = np.random.default_rng(seed)
    out = []
    # ideal pointer: zero temperature limit of a 3-qubit register
    p = rabi_process(1.0, math.pi / 3)
    beta = 1.0
    ideal = PointerModel.qubit_register(3, 1.0, 1e3, 2)
    ch = build_channel(ideal, assignment_minimal_energy(2), p.h0)
    rep = crooks_report(p, beta, ch, ch)
    worst_g = max(abs(e.gamma) for e in rep.table)
    out.append(CheckResult("ideal channels: Crooks ratio 1, gamma 0", rep.max_relative_violation < 1e-12 and worst_g < 1e-12, f"ratio {rep.max_relative_violation:.3e}, gamma {worst_g:.3e}"))

    ins = random_instance(rng, 3, 2, "min_invasive")
    pointer = PointerModel.from_energies(np.linspace(0.0, 1.0, 6), beta, 3)
    ch0 = build_channel(pointer, assignment_min_invasive(3), ins.process.h0)
    chf = build_channel(pointer, assignment_min_invasive(3), ins.process.hf)
    rep = crooks_report(ins.process, beta, ch0, chf)
    out.append(CheckResult("Latin-square channels at beta_P = beta_S break Crooks (d_S = 3)", rep.max_relative_violation > 1e-6, f"max violation {rep.max_relative_violation:.3e}"))

    direct = classical_relative_entropy(nonideal_joint(ins.process, beta, ch0).p, backward_joint(ins.process, beta, chf).p)
    out.append(CheckResult("<sigma> = D(P_F||P_B)", abs(rep.mean_sigma - direct) < 1e-12, f"{abs(rep.mean_sigma - direct):.3e}"))
    return out


def check_fannes(count: int, seed: int) -> list:
    worst = -math.inf
    for ins in _instances(seed, count):
        f = fannes_bound(ins.channel0, ins.process, ins.beta)
        worst = max(worst, f.delta_s0 - f.bound)
    return [CheckResult("Fannes-Audenaert bound on dS0", worst <= 1e-10, f"max dS0 - bound {worst:.3e}")]


def check_monte_carlo(samples: int, seed: int) -> list:
    p = rabi_process(1.0, math.pi)
    beta = 1.0 / 30.0
    ch = build_channel(PointerModel.qubit_register(3, 0.1, beta, 2), assignment_minimal_energy(2), p.h0)
    a = monte_carlo_tpm(p, beta, ch, ch, samples, seed)
    b = monte_carlo_tpm(p, beta, ch, ch, samples, seed)
    w = mean_work_of(nonideal_joint(p, beta, ch), p.h0, p.hf)
    j = jarzynski_functional(p, beta, ch)
    zw = abs(a.mean_w.value - w) / a.mean_w.stderr
    zj = abs(a.jarzynski.value - j) / a.jarzynski.stderr
    ideal = build_channel(PointerModel.qubit_register(3, 1.0, 1e3, 2), assignment_minimal_energy(2), p.h0)
    c = monte_carlo_tpm(rabi_process(1.0, math.pi / 3), 1.0, ideal, ideal, samples, seed + 1)
    zi = abs(c.jarzynski.value - 1.0) / c.jarzynski.stderr  # h0 = hf, so exp(-beta dF) = 1
    return [
        CheckResult("Monte Carlo <W> within 4 stderr", zw < 4, f"z = {zw:.2f}"),
        CheckResult("Monte Carlo ideal-channel <exp(-beta W)> = exp(-beta dF)", zi < 4, f"z = {zi:.2f}"),
        CheckResult("Monte Carlo <exp(-beta W)> within 4 stderr", zj < 4, f"z = {zj:.2f}"),
        CheckResult("Monte Carlo deterministic under a fixed seed", a.mean_w == b.mean_w and a.jarzynski == b.jarzynski, ""),
    ]


def run_verification(quick: bool = False, seed: int = 2024) -> tuple:
    """All invariant checks plus informational notes."""
    n = 20 if quick else 100
    checks = []
    notes = []
    checks += check_figures()
    checks += check_jarzynski(n, seed)
    dev_checks, dev_notes = check_deviation_bound(2 * n, seed + 10)
    checks += dev_checks
    notes += dev_notes
    checks += check_channels(seed + 20)
    checks += check_measurement_unitary(n, seed + 30)
    checks += check_dissipation(10 if quick else 50, seed + 40)
    checks += check_crooks(seed + 50)
    checks += check_fannes(n, seed + 60)
    checks += check_monte_carlo(100_000 if quick else 1_000_000, seed + 70)
    return checks, notes
