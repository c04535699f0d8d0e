import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nonideal_tpm.errors import DimensionMismatch, NoConvergence, NotAState, NotHermitian, SupportViolation
from nonideal_tpm.linalg import (
    binary_entropy,
    evolve,
    hermitian_spectrum,
    is_unitary,
    kron,
    partial_trace_pointer,
    partial_trace_system,
    relative_entropy,
    trace_distance,
    unitary_exp,
    vn_entropy,
)
from nonideal_tpm.thermo import HermitianOperator, gibbs

from conftest import random_density, random_hermitian, seeds

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_kron_examples():
    rng = np.random.default_rng(1)
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    b = random_hermitian(rng, 3)
    assert np.allclose(kron([[2.0]], b), 2 * b, atol=0)
    a = random_hermitian(rng, 2)
    k = kron(a, b)
    assert k.shape == (6, 6)
    assert abs(np.trace(k) - np.trace(a) * np.trace(b)) < 1e-12


def test_kron_matches_numpy_and_index_rule():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    b = rng.normal(size=(4, 5))
    k = kron(a, b)
    assert np.array_equal(k, np.kron(a, b))
    assert k[1 * 4 + 2, 2 * 5 + 3] == a[1, 2] * b[2, 3]


@given(seeds)
def test_kron_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_hermitian(rng, d) for d in (2, 3, 2))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-14


def test_spectrum_examples():
    assert np.allclose(hermitian_spectrum(np.diag([3.0, 1.0, 2.0])).eigenvalues, [1, 2, 3], atol=0)
    assert np.allclose(hermitian_spectrum(SX).eigenvalues, [-1, 1], atol=1e-15)


def test_spectrum_random_8x8_against_eigh():
    rng = np.random.default_rng(8)
    a = random_hermitian(rng, 8)
    spec = hermitian_spectrum(a)
    assert np.max(np.abs(spec.reconstruct() - a)) < 1e-11
    assert np.max(np.abs(spec.eigenvalues - np.linalg.eigh(a)[0])) < 1e-12
    assert is_unitary(spec.eigenvectors)


@given(seeds, st.integers(min_value=1, max_value=16))
def test_spectrum_reconstruction(seed, d):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, d, scale=float(rng.uniform(0.01, 100)))
    spec = hermitian_spectrum(a)
    assert np.max(np.abs(spec.reconstruct() - a)) < 1e-11 * max(1.0, np.abs(a).max())
    assert np.all(np.diff(spec.eigenvalues) >= 0)


def test_spectrum_degenerate_and_real():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    a = q @ np.diag([1.0, 1.0, 1.0, 2.0, 2.0]) @ q.T
    spec = hermitian_spectrum(a)
    assert np.allclose(spec.eigenvalues, [1, 1, 1, 2, 2], atol=1e-13)
    assert np.max(np.abs(spec.reconstruct() - a)) < 1e-12


def test_spectrum_errors():
    with pytest.raises(NotHermitian):
        hermitian_spectrum(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(DimensionMismatch):
        hermitian_spectrum(np.zeros((2, 3)))
    rng = np.random.default_rng(4)
    with pytest.raises(NoConvergence):
        hermitian_spectrum(random_hermitian(rng, 12), max_sweeps=1)


def test_partial_trace_examples():
    rng = np.random.default_rng(5)
    rho = random_density(rng, 3)
    tau = random_density(rng, 4)
    assert np.max(np.abs(partial_trace_pointer(kron(rho, tau), 3, 4) - rho)) < 1e-13
    assert np.max(np.abs(partial_trace_system(kron(rho, tau), 3, 4) - tau)) < 1e-13
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert np.allclose(partial_trace_pointer(np.outer(bell, bell), 2, 2), np.eye(2) / 2, atol=1e-15)
    big = random_density(rng, 12)
    assert abs(np.trace(partial_trace_pointer(big, 3, 4)) - np.trace(big)) < 1e-13
    with pytest.raises(DimensionMismatch):
        partial_trace_pointer(big, 2, 4)


@given(seeds)
def test_partial_trace_of_products(seed):
    rng = np.random.default_rng(seed)
    rho, tau = random_density(rng, 2), random_density(rng, 8)
    assert np.max(np.abs(partial_trace_pointer(kron(rho, tau), 2, 8) - rho)) < 1e-13


def test_trace_distance_examples():
    rng = np.random.default_rng(6)
    rho = random_density(rng, 3)
    assert trace_distance(rho, rho) == 0.0
    assert abs(trace_distance(np.diag([1.0, 0]), np.diag([0, 1.0])) - 1) < 1e-15
    with pytest.raises(DimensionMismatch):
        trace_distance(rho, np.eye(2) / 2)


@given(seeds, st.integers(min_value=2, max_value=5))
def test_trace_distance_metric(seed, d):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density(rng, d, rank=int(rng.integers(1, d + 1))) for _ in range(3))
    dab = trace_distance(a, b)
    assert abs(dab - trace_distance(b, a)) < 1e-12
    assert dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12
    assert -1e-12 <= dab <= 1 + 1e-12
    # independent oracle: nuclear norm via singular values
    assert abs(dab - 0.5 * np.linalg.svd(a - b, compute_uv=False).sum()) < 1e-12


def test_vn_entropy_examples():
    v = np.array([1, 1j]) / math.sqrt(2)
    assert abs(vn_entropy(np.outer(v, v.conj()))) < 1e-14
    for d in (2, 3, 7):
        assert abs(vn_entropy(np.eye(d) / d) - math.log(d)) < 1e-14
    e, beta = 1.0, 1.0 / 30.0
    z = 1 + math.exp(-beta * e)
    g = gibbs(HermitianOperator.diagonal([0.0, e]), beta)
    assert abs(vn_entropy(g.matrix) - binary_entropy(1 / z)) < 1e-14
    with pytest.raises(NotAState):
        vn_entropy(np.eye(2))
    with pytest.raises(NotAState):
        vn_entropy(np.diag([1.5, -0.5]))


def test_vn_entropy_clamps_tiny_negative_eigenvalues():
    assert vn_entropy(np.diag([1.0 + 5e-13, -5e-13])) == 0.0


def test_relative_entropy_examples():
    rng = np.random.default_rng(7)
    rho = random_density(rng, 4)
    assert abs(relative_entropy(rho, rho)) < 1e-12
    assert abs(relative_entropy(np.diag([1.0, 0]), np.eye(2) / 2) - math.log(2)) < 1e-14
    with pytest.raises(SupportViolation):
        relative_entropy(np.eye(2) / 2, np.diag([1.0, 0]))
    assert relative_entropy(np.diag([1.0, 0]), np.diag([0.5, 0.5])) > 0


@given(seeds, st.integers(min_value=2, max_value=5))
def test_relative_entropy_positive(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(rng, d), random_density(rng, d)
    assert relative_entropy(rho, sigma) >= -1e-12
    # commuting oracle: classical KL divergence of the spectra
    p = np.abs(rng.normal(size=d)) + 0.01
    q = np.abs(rng.normal(size=d)) + 0.01
    p, q = p / p.sum(), q / q.sum()
    assert abs(relative_entropy(np.diag(p), np.diag(q)) - float(np.sum(p * np.log(p / q)))) < 1e-12


def test_evolve_examples():
    rng = np.random.default_rng(9)
    rho = random_density(rng, 2)
    assert np.max(np.abs(evolve(SZ, 0.0, rho) - rho)) < 1e-15
    e = 1.7
    assert np.max(np.abs(evolve(-(e / 2) * SZ, 2 * math.pi / e, rho) - rho)) < 1e-12
    h = random_hermitian(rng, 5)
    u = unitary_exp(hermitian_spectrum(h), 0.37)
    assert np.max(np.abs(u @ u.conj().T - np.eye(5))) < 1e-12
    with pytest.raises(DimensionMismatch):
        evolve(h, 1.0, rho)


@given(seeds)
def test_evolve_trace_preserving_and_matches_series(seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, 4)
    rho = random_density(rng, 4)
    t = float(rng.uniform(-2, 2))
    out = evolve(h, t, rho)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.max(np.abs(out - out.conj().T)) == 0.0
    # oracle: exp(-iHt) by scaling and squaring of a Taylor series
    m = -1j * h * t / 64
    u = np.eye(4, dtype=complex)
    term = np.eye(4, dtype=complex)
    for k in range(1, 30):
        term = term @ m / k
        u = u + term
    for _ in range(6):
        u = u @ u
    assert np.max(np.abs(out - u @ rho @ u.conj().T)) < 1e-11
