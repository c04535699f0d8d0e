"""Seeded random instances for randomized checks.

Hamiltonians are real symmetric (so the time-reversed protocol exists), with
levels drawn uniformly from ``[-1, 1]`` and kept at least ``MIN_GAP`` apart.
Processes are piecewise-constant schedules of one to three random real
Hamiltonians, so every instance carries a time family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurement import (
    AssignmentMatrix,
    MeasurementChannel,
    PointerModel,
    assignment_min_invasive,
    assignment_minimal_energy,
    build_channel,
)
from .thermo import HermitianOperator
from .tpm import Process, piecewise_process

MIN_GAP = 1e-2
BETA_RANGE = (0.1, 2.0)
BETA_P_RANGE = (0.0, 3.0)


def random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


def random_levels(rng: np.random.Generator, d: int, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    while True:
        e = np.sort(rng.uniform(low, high, size=d))
        if d < 2 or np.min(np.diff(e)) > MIN_GAP:
            return e


def random_real_hamiltonian(rng: np.random.Generator, d: int) -> HermitianOperator:
    return HermitianOperator(random_levels(rng, d), random_orthogonal(rng, d).astype(np.complex128))


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_process(rng: np.random.Generator, d: int) -> Process:
    h0 = random_real_hamiltonian(rng, d)
    hf = random_real_hamiltonian(rng, d)
    segments = int(rng.integers(1, 4))
    hams = []
    for _ in range(segments):
        a = rng.normal(size=(d, d))
        hams.append((a + a.T) / 2)
    durations = rng.uniform(0.2, 1.5, size=segments)
    return piecewise_process(h0, hf, hams, durations)


def random_pointer(rng: np.random.Generator, d_s: int, lam: int) -> PointerModel:
    energies = rng.uniform(0.0, 2.0, size=d_s * lam)
    return PointerModel.from_energies(energies, rng.uniform(*BETA_P_RANGE), d_s)


def random_assignment(rng: np.random.Generator, d: int) -> AssignmentMatrix:
    """Zero diagonal with every column an arbitrary permutation of ``0..d-1``."""
    pi = np.zeros((d, d), dtype=np.int64)
    for j in range(d):
        others = [i for i in range(d) if i != j]
        pi[others, j] = rng.permutation(np.arange(1, d))
    return AssignmentMatrix(pi)


def assignment_of_kind(rng: np.random.Generator, d: int, kind: str) -> AssignmentMatrix:
    if kind == "minimal_energy":
        return assignment_minimal_energy(d)
    if kind == "min_invasive":
        return assignment_min_invasive(d)
    if kind == "random":
        return random_assignment(rng, d)
    raise ValueError(f"unknown assignment kind {kind!r}")


@dataclass(frozen=True)
class Instance:
    process: Process
    beta: float
    channel0: MeasurementChannel
    channelf: MeasurementChannel


def random_instance(rng: np.random.Generator, d_s: int, lam: int = 2, kind: str = "random") -> Instance:
    """Random process plus forward and backward channels sharing one pointer and assignment."""
    process = random_process(rng, d_s)
    pointer = random_pointer(rng, d_s, lam)
    pi = assignment_of_kind(rng, d_s, kind)
    beta = float(rng.uniform(*BETA_RANGE))
    ch0 = build_channel(pointer, pi, process.h0)
    chf = build_channel(pointer, pi, process.hf)
    return Instance(process, beta, ch0, chf)
