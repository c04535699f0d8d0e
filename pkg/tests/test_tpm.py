import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nonideal_tpm.ensembles import random_instance, random_pointer, random_process, random_real_hamiltonian
from nonideal_tpm.errors import BasisMismatch, NotTimeReversalSymmetric, NotUnitary
from nonideal_tpm.measurement import (
    PointerModel,
    assignment_min_invasive,
    assignment_minimal_energy,
    build_channel,
)
from nonideal_tpm.scenarios.rabi import qubit_hamiltonian, rabi_ideal_work, rabi_process
from nonideal_tpm.thermo import HermitianOperator, free_energy_difference, gibbs
from nonideal_tpm.tpm import (
    Process,
    backward_joint,
    backward_process,
    deviation_bound,
    deviation_bound_holder,
    energy_change_from_state,
    energy_change_nonideal,
    energy_change_terms,
    fourier_unitary,
    ideal_energy_change,
    ideal_joint,
    mean_work,
    mean_work_of,
    nonideal_joint,
    piecewise_process,
    transition_matrix,
    work_decomposition,
    work_deviation,
    work_distribution,
)

from conftest import seeds

BETA_S = 1.0 / 30.0


def ideal_channel(h, d=2):
    return build_channel(PointerModel.qubit_register(3, 1.0, 1e3, d) if d == 2 else PointerModel.from_energies(np.arange(2.0 * d), 1e3, d), assignment_minimal_energy(d), h)


def fig2_channel(h, ratio=1.0):
    return build_channel(PointerModel.qubit_register(3, 0.1, ratio * BETA_S), assignment_minimal_energy(2), h)


def identity_process(h):
    return Process(h, h, np.eye(h.dim))


def test_process_validation():
    h = qubit_hamiltonian(1.0)
    with pytest.raises(NotUnitary):
        Process(h, h, np.array([[1.0, 1.0], [0.0, 1.0]]))
    p = rabi_process(1.0, 0.8)
    assert np.max(np.abs(p.family(0.0) - np.eye(2))) < 1e-12
    assert np.max(np.abs(p.family(p.t_f) - p.u)) < 1e-12


def test_rabi_unitary_examples():
    assert np.allclose(rabi_process(1.0, 0.0).u, np.eye(2), atol=0)
    assert np.allclose(rabi_process(1.0, 2 * math.pi).u, -np.eye(2), atol=1e-15)
    sy = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(rabi_process(1.0, math.pi).u, -1j * sy, atol=1e-15)
    assert np.allclose(transition_matrix(rabi_process(1.0, math.pi)), [[0, 1], [1, 0]], atol=1e-30)


def test_transition_matrix_examples():
    h = HermitianOperator.diagonal([0.0, 0.4, 1.1])
    assert np.array_equal(transition_matrix(identity_process(h)), np.eye(3))
    t = transition_matrix(Process(h, h, fourier_unitary(h)))
    assert np.max(np.abs(t - 1 / 3)) < 1e-15
    for theta in np.linspace(0, 2 * math.pi, 13):
        assert abs(transition_matrix(rabi_process(1.0, theta))[0, 1] - math.sin(theta / 2) ** 2) < 1e-15


@given(seeds, st.sampled_from([2, 3, 4]))
def test_transition_matrix_doubly_stochastic(seed, d):
    t = transition_matrix(random_process(np.random.default_rng(seed), d))
    assert np.max(np.abs(t.sum(axis=0) - 1)) < 1e-12
    assert np.max(np.abs(t.sum(axis=1) - 1)) < 1e-12


def test_ideal_joint_examples():
    h = HermitianOperator.diagonal([0.0, 0.4, 1.1])
    g = gibbs(h, 0.9)
    assert np.allclose(ideal_joint(identity_process(h), 0.9).p, np.diag(g.populations), atol=1e-16)
    h2 = qubit_hamiltonian(1.0)
    p = ideal_joint(rabi_process(1.0, math.pi), BETA_S).p
    pop = gibbs(h2, BETA_S).populations
    assert np.allclose(p, [[0, pop[0]], [pop[1], 0]], atol=1e-16)


def test_nonideal_joint_ideal_limit():
    p = rabi_process(1.0, 1.1)
    assert np.max(np.abs(nonideal_joint(p, 0.5, ideal_channel(p.h0)).p - ideal_joint(p, 0.5).p)) < 1e-12


def test_nonideal_joint_rejects_wrong_basis():
    rng = np.random.default_rng(0)
    p = random_process(rng, 3)
    other = random_real_hamiltonian(rng, 3)
    ch = build_channel(PointerModel.from_energies(np.arange(6.0), 1.0, 3), assignment_minimal_energy(3), other)
    with pytest.raises(BasisMismatch):
        nonideal_joint(p, 1.0, ch)


@given(seeds, st.sampled_from([2, 3, 4]), st.sampled_from(["random", "minimal_energy", "min_invasive"]))
def test_joint_distributions_normalized(seed, d, kind):
    ins = random_instance(np.random.default_rng(seed), d, 2, kind)
    p0 = gibbs(ins.process.h0, ins.beta).populations
    for joint in (
        ideal_joint(ins.process, ins.beta),
        nonideal_joint(ins.process, ins.beta, ins.channel0),
        backward_joint(ins.process, ins.beta, ins.channelf),
    ):
        assert joint.p.min() >= -1e-14
        assert abs(joint.p.sum() - 1) < 1e-12
    assert np.max(np.abs(nonideal_joint(ins.process, ins.beta, ins.channel0).marginal_first() - p0)) < 1e-13


def test_work_distribution_examples():
    h = qubit_hamiltonian(1.0)
    dist = work_distribution(ideal_joint(identity_process(h), 1.0), h, h)
    assert len(dist.atoms) == 1 and dist.atoms[0][0] == 0.0 and abs(dist.atoms[0][1] - 1) < 1e-15
    pop = gibbs(h, BETA_S).populations
    dist = work_distribution(ideal_joint(rabi_process(1.0, math.pi), BETA_S), h, h)
    nonzero = [(w, p) for w, p in dist.atoms if p > 1e-15]
    assert nonzero == [(-1.0, pytest.approx(pop[1], abs=1e-16)), (1.0, pytest.approx(pop[0], abs=1e-16))]


def test_work_distribution_merges_degenerate_differences():
    h0 = HermitianOperator.diagonal([0.0, 1.0, 2.0])
    rng = np.random.default_rng(3)
    u = random_process(rng, 3).u
    dist = work_distribution(ideal_joint(Process(h0, h0, u), 0.7), h0, h0)
    assert np.allclose(dist.values, [-2, -1, 0, 1, 2], atol=1e-15)
    assert np.all(np.diff(dist.values) > 0)
    assert abs(dist.probs.sum() - 1) < 1e-12


@given(seeds, st.sampled_from([2, 3, 4]))
def test_mean_work_matches_energy_change(seed, d):
    ins = random_instance(np.random.default_rng(seed), d)
    p, b = ins.process, ins.beta
    w = mean_work(work_distribution(ideal_joint(p, b), p.h0, p.hf))
    assert abs(w - ideal_energy_change(p, b)) < 1e-12
    assert abs(w - mean_work_of(ideal_joint(p, b), p.h0, p.hf)) < 1e-12


def test_rabi_mean_work():
    for theta in np.linspace(0, 2 * math.pi, 17):
        w = mean_work_of(ideal_joint(rabi_process(1.0, theta), BETA_S), qubit_hamiltonian(1.0), qubit_hamiltonian(1.0))
        assert abs(w - math.sin(theta / 2) ** 2 * math.tanh(BETA_S / 2)) < 1e-12
    assert rabi_ideal_work(1.0, BETA_S, 0.0) == 0.0


def test_fig2_deviation_ratio():
    p = rabi_process(1.0, math.pi)
    w_ideal = mean_work_of(ideal_joint(p, BETA_S), p.h0, p.hf)
    w_non = mean_work_of(nonideal_joint(p, BETA_S, fig2_channel(p.h0)), p.h0, p.hf)
    assert abs(abs(w_non - w_ideal) / w_ideal - 0.49875) < 5e-4


@given(seeds, st.sampled_from([2, 3, 4]))
def test_work_decomposition_sums(seed, d):
    ins = random_instance(np.random.default_rng(seed), d)
    p, b = ins.process, ins.beta
    dec = work_decomposition(p, b, ins.channel0)
    assert abs(dec.cmax_term + dec.correction - mean_work_of(nonideal_joint(p, b, ins.channel0), p.h0, p.hf)) < 1e-12
    dev = mean_work_of(nonideal_joint(p, b, ins.channel0), p.h0, p.hf) - mean_work_of(ideal_joint(p, b), p.h0, p.hf)
    assert abs(work_deviation(p, b, ins.channel0) - dev) < 1e-12


def test_work_decomposition_examples():
    p = rabi_process(1.0, 0.7)
    assert abs(work_decomposition(p, 1.0, ideal_channel(p.h0)).correction) < 1e-12
    p = rabi_process(1.0, math.pi / 2)
    dec = work_decomposition(p, BETA_S, fig2_channel(p.h0))
    assert abs(dec.cmax_term + dec.correction - mean_work_of(ideal_joint(p, BETA_S), p.h0, p.hf)) < 1e-15


@given(seeds, st.sampled_from([2, 3, 4]))
def test_fourier_process_estimated_exactly(seed, d):
    rng = np.random.default_rng(seed)
    h0 = random_real_hamiltonian(rng, d)
    hf = HermitianOperator(rng.uniform(-1, 1, d) + np.arange(d), h0.eigenbasis)
    p = Process(h0, hf, fourier_unitary(h0))
    ch = build_channel(random_pointer(rng, d, 2), assignment_minimal_energy(d), h0)
    beta = float(rng.uniform(0.1, 2))
    assert abs(mean_work_of(nonideal_joint(p, beta, ch), h0, hf) - mean_work_of(ideal_joint(p, beta), h0, hf)) < 1e-12


def test_deviation_bound_ideal_limit():
    p = rabi_process(1.0, 1.0)
    ch = ideal_channel(p.h0)
    assert deviation_bound(p, ch) < 1e-300
    assert abs(work_deviation(p, 1.0, ch)) < 1e-300


def test_deviation_bound_on_fig2_sweep():
    for ratio in (1, 150, 300, 450, 600, 750):
        for theta in np.linspace(0, 2 * math.pi, 201):
            p = rabi_process(1.0, theta)
            ch = fig2_channel(p.h0, ratio)
            assert abs(work_deviation(p, BETA_S, ch)) <= deviation_bound(p, ch) + 1e-12


def test_spectral_norm_bound_fails_for_two_signed_spectrum():
    # U = I, H = -(E/2) sigma_z: the measurement alone shifts the mean work by
    # (1 - C) tanh(beta E / 2) E, which exceeds (1 - C) E / 2 once tanh > 1/2
    e, beta = 1.0, 2.0
    p = identity_process(qubit_hamiltonian(e))
    ch = fig2_channel(p.h0, 1.0)
    dev = abs(work_deviation(p, beta, ch))
    assert abs(dev - (1 - ch.c_max) * math.tanh(beta * e / 2) * e) < 1e-15
    assert dev > deviation_bound(p, ch) + 1e-6
    assert dev <= deviation_bound_holder(p, ch)


def test_spectral_norm_bound_holds_for_one_signed_spectrum():
    # shifting Hf to be non-negative makes ||Hf|| = E_max - E_min
    e, beta = 1.0, 2.0
    h = HermitianOperator.diagonal([0.0, e])
    p = identity_process(h)
    ch = fig2_channel(h, 1.0)
    assert abs(work_deviation(p, beta, ch)) <= deviation_bound(p, ch)


@given(seeds, st.sampled_from([2, 3, 4]), st.sampled_from(["random", "minimal_energy", "min_invasive"]))
def test_holder_deviation_bound(seed, d, kind):
    ins = random_instance(np.random.default_rng(seed), d, 2, kind)
    assert abs(work_deviation(ins.process, ins.beta, ins.channel0)) <= deviation_bound_holder(ins.process, ins.channel0) + 1e-12


@given(seeds, st.sampled_from([2, 3, 4]))
def test_energy_change_paths_agree(seed, d):
    ins = random_instance(np.random.default_rng(seed), d)
    p, b, c0, cf = ins.process, ins.beta, ins.channel0, ins.channelf
    direct = energy_change_nonideal(p, b, c0, cf)
    assert abs(direct - energy_change_from_state(p, b, c0, cf)) < 1e-12
    assert abs(direct - energy_change_terms(p, b, c0, cf).total) < 1e-12


def test_energy_change_examples():
    p = rabi_process(1.0, 0.9)
    ch = ideal_channel(p.h0)
    assert abs(energy_change_nonideal(p, 1.0, ch, ch) - ideal_energy_change(p, 1.0)) < 1e-12
    h0 = HermitianOperator.diagonal([0.0, 0.5, 1.3])
    hot = build_channel(PointerModel.from_energies(np.arange(6.0), 0.0, 3), assignment_minimal_energy(3), h0)
    expected = h0.eigenvalues.mean() - gibbs(h0, 0.8).mean_energy()
    assert abs(energy_change_nonideal(identity_process(h0), 0.8, hot, hot) - expected) < 1e-12


def test_backward_process_examples():
    p = rabi_process(1.0, 1.3)
    b = backward_process(p)
    assert np.max(np.abs(transition_matrix(b) - transition_matrix(p).T)) < 1e-12
    assert np.max(np.abs(transition_matrix(backward_process(b)) - transition_matrix(p))) < 1e-13
    h = HermitianOperator.diagonal([0.0, 1.0])
    assert np.array_equal(backward_process(identity_process(h)).u, np.eye(2))
    complex_h = HermitianOperator.from_matrix(np.array([[0, 1j], [-1j, 1]]))
    with pytest.raises(NotTimeReversalSymmetric):
        backward_process(Process(complex_h, complex_h, np.eye(2)))


@given(seeds, st.sampled_from([2, 3, 4]))
def test_micro_reversibility(seed, d):
    p = random_process(np.random.default_rng(seed), d)
    assert np.max(np.abs(transition_matrix(backward_process(p)) - transition_matrix(p).T)) < 1e-12


def test_backward_family_endpoints():
    p = piecewise_process(
        HermitianOperator.diagonal([0.0, 1.0]),
        HermitianOperator.diagonal([0.0, 1.5]),
        [np.array([[0.0, 0.4], [0.4, 1.0]]), np.array([[0.2, -0.3], [-0.3, 1.2]])],
        [0.5, 0.8],
    )
    b = backward_process(p)
    assert np.max(np.abs(b.family(0.0) - np.eye(2))) < 1e-12
    assert np.max(np.abs(b.family(b.t_f) - b.u)) < 1e-12


def test_backward_joint_examples():
    h = HermitianOperator.diagonal([0.0, 0.5, 1.2])
    ch = ideal_channel(h, 3)
    g = gibbs(h, 0.9)
    assert np.max(np.abs(backward_joint(identity_process(h), 0.9, ch).p - np.diag(g.populations))) < 1e-12
    rng = np.random.default_rng(2)
    p = random_process(rng, 3)
    beta = 0.7
    c0, cf = ideal_channel(p.h0, 3), ideal_channel(p.hf, 3)
    pf, pb = nonideal_joint(p, beta, c0).p, backward_joint(p, beta, cf).p
    w = p.hf.eigenvalues[None, :] - p.h0.eigenvalues[:, None]
    df = free_energy_difference(p.h0, p.hf, beta)
    assert np.max(np.abs(pb - np.exp(-beta * (w - df)) * pf)) < 1e-12
