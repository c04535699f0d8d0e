"""Resonantly driven two-level atom (Rabi rotation about the y axis)."""

from __future__ import annotations

import math

import numpy as np

from ..thermo import HermitianOperator
from ..tpm import Process


def rabi_unitary(theta: float) -> np.ndarray:
    """``cos(theta/2) I - i sin(theta/2) sigma_y``, a real rotation matrix."""
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def qubit_hamiltonian(e_s: float) -> HermitianOperator:
    """``-(e_s/2) sigma_z``: level 0 is the ground state."""
    return HermitianOperator.diagonal([-e_s / 2.0, e_s / 2.0])


def rabi_process(e_s: float, theta: float, omega: float = 1.0) -> Process:
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    h = qubit_hamiltonian(e_s)
    t_f = theta / omega

    def family(t: float) -> np.ndarray:
        return rabi_unitary(omega * t)

    return Process(h, h, rabi_unitary(theta), family, t_f)


def rabi_ideal_work(e_s: float, beta_s: float, theta: float) -> float:
    """``E_S sin^2(theta/2) tanh(beta_S E_S / 2)``."""
    return e_s * math.sin(theta / 2.0) ** 2 * math.tanh(beta_s * e_s / 2.0)


def register_correlation(x: float) -> float:
    """``C_max`` of a 3-qubit thermal pointer measuring a qubit, ``x = beta_P E_P``."""
    return (1.0 + 3.0 * math.exp(-x)) / (1.0 + math.exp(-x)) ** 3
