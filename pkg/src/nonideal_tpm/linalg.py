"""Dense complex linear algebra used by the rest of the package.

Matrices are plain ``numpy`` complex128 arrays in row-major layout.  The
Hermitian eigensolver is a cyclic Jacobi iteration so that results do not
depend on the LAPACK build; dimensions here never exceed a few dozen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotAState,
    NotHermitian,
    SupportViolation,
)

HERMITIAN_TOL = 1e-12
JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 50
EIG_CLAMP = 1e-12
TRACE_TOL = 1e-10
SUPPORT_EIG_TOL = 1e-12
SUPPORT_OVERLAP_TOL = 1e-14


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigen-decomposition ``a = eigenvectors @ diag(eigenvalues) @ eigenvectors^H``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply(self, fn) -> np.ndarray:
        """Matrix function ``V f(Λ) V^H`` for a scalar function ``fn``."""
        v = self.eigenvectors
        return (v * fn(self.eigenvalues)) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``out[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    a = as_matrix(a)
    b = as_matrix(b)
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def hermitian_spectrum(a, tol: float = HERMITIAN_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> HermitianSpectrum:
    """Cyclic complex Jacobi diagonalisation of a Hermitian matrix.

    Each rotation first strips the phase of the pivot ``a[p, q]`` and then
    applies the real symmetric Jacobi rotation.  Iteration stops once the
    off-diagonal Frobenius mass drops below ``1e-14`` (relative to the
    Frobenius norm when that exceeds one).  Eigenvalues come back ascending.
    """
    a = as_matrix(a)
    n, m = a.shape
    if n != m:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")
    if hermiticity_defect(a) > tol:
        raise NotHermitian(f"max |a - a^H| = {hermiticity_defect(a):.3e} exceeds {tol:.1e}")

    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=np.complex128)
    threshold = JACOBI_OFF_TOL * max(1.0, float(np.linalg.norm(a)))

    offdiag = ~np.eye(n, dtype=bool)
    sweeps = 0
    while True:
        off = float(np.linalg.norm(a[offdiag]))
        if off < threshold:
            break
        if sweeps >= max_sweeps:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                cphase = phase.conjugate()
                zeta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if abs(zeta) > 1e150:
                    t = 0.5 / zeta
                else:
                    t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * cphase * col_q
                a[:, q] = s * col_p + c * cphase * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * cphase * vq
                v[:, q] = s * vp + c * cphase * vq

    evals = np.real(np.diag(a)).copy()
    order = np.argsort(evals, kind="stable")
    return HermitianSpectrum(evals[order], v[:, order], sweeps)


def unitary_exp(spectrum: HermitianSpectrum, t: float) -> np.ndarray:
    """``exp(-i H t)`` from a spectral decomposition of ``H`` (hbar = 1)."""
    return spectrum.apply(lambda lam: np.exp(-1j * lam * t))


def _spectrum_of(h) -> HermitianSpectrum:
    if isinstance(h, HermitianSpectrum):
        return h
    if hasattr(h, "eigenvalues") and hasattr(h, "eigenbasis"):
        return HermitianSpectrum(np.asarray(h.eigenvalues, dtype=float), np.asarray(h.eigenbasis, dtype=complex))
    return hermitian_spectrum(h)


def evolve(h, t: float, state) -> np.ndarray:
    """Evolve a density matrix for time ``t`` under a time-independent Hamiltonian.

    ``h`` may be a raw Hermitian matrix, a :class:`HermitianSpectrum`, or any
    object exposing ``eigenvalues`` and ``eigenbasis``.
    """
    rho = as_matrix(state)
    spec = _spectrum_of(h)
    if spec.eigenvectors.shape[0] != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"Hamiltonian dim {spec.eigenvectors.shape[0]} vs state {rho.shape}")
    u = unitary_exp(spec, t)
    out = u @ rho @ u.conj().T
    return 0.5 * (out + out.conj().T)


def partial_trace_pointer(rho_sp, d_s: int, d_p: int) -> np.ndarray:
    """Trace out the second (pointer) factor of a ``d_s * d_p`` bipartite operator."""
    rho = as_matrix(rho_sp)
    if rho.shape != (d_s * d_p, d_s * d_p):
        raise DimensionMismatch(f"expected {(d_s * d_p,) * 2}, got {rho.shape}")
    return np.einsum("ikjk->ij", rho.reshape(d_s, d_p, d_s, d_p))


def partial_trace_system(rho_sp, d_s: int, d_p: int) -> np.ndarray:
    rho = as_matrix(rho_sp)
    if rho.shape != (d_s * d_p, d_s * d_p):
        raise DimensionMismatch(f"expected {(d_s * d_p,) * 2}, got {rho.shape}")
    return np.einsum("kikj->ij", rho.reshape(d_s, d_p, d_s, d_p))


def trace_distance(rho, sigma) -> float:
    rho = as_matrix(rho)
    sigma = as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"{rho.shape} vs {sigma.shape}")
    diff = rho - sigma
    return 0.5 * float(np.sum(np.abs(hermitian_spectrum(diff).eigenvalues)))


def _state_eigenvalues(rho: np.ndarray) -> HermitianSpectrum:
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotAState(f"trace {tr:.12g} differs from 1")
    spec = hermitian_spectrum(rho)
    lam = spec.eigenvalues
    if lam.size and lam[0] < -EIG_CLAMP:
        raise NotAState(f"negative eigenvalue {lam[0]:.3e}")
    return HermitianSpectrum(np.where(lam < 0.0, 0.0, lam), spec.eigenvectors, spec.sweeps)


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def vn_entropy(rho) -> float:
    """Von Neumann entropy in nats, ``0 log 0 := 0``."""
    spec = _state_eigenvalues(as_matrix(rho))
    return max(float(-np.sum(_xlogx(spec.eigenvalues))), 0.0)


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    return float(-np.sum(_xlogx(np.where(p < 0, 0.0, p))))


def binary_entropy(x: float) -> float:
    return shannon_entropy([x, 1.0 - x])


def _cross_term(rs: HermitianSpectrum, sigma: np.ndarray) -> float:
    ss = _state_eigenvalues(sigma)
    r = rs.eigenvalues
    for i in np.flatnonzero(r > SUPPORT_EIG_TOL):
        vec = rs.eigenvectors[:, i]
        if float(np.real(vec.conj() @ sigma @ vec)) <= SUPPORT_OVERLAP_TOL:
            raise SupportViolation("supp(rho) is not contained in supp(sigma)")

    weights = r[:, None] * np.abs(rs.eigenvectors.conj().T @ ss.eigenvectors) ** 2
    s = ss.eigenvalues
    zero = s <= 0.0
    if np.any(weights[:, zero] > SUPPORT_OVERLAP_TOL):
        raise SupportViolation("rho has weight on the kernel of sigma")
    return float(np.sum(weights[:, ~zero] * np.log(s[~zero])))


def cross_log_trace(rho, sigma) -> float:
    """``Tr(rho log sigma)``; raises :class:`SupportViolation` when it diverges."""
    rho = as_matrix(rho)
    sigma = as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"{rho.shape} vs {sigma.shape}")
    return _cross_term(_state_eigenvalues(rho), sigma)


def relative_entropy(rho, sigma) -> float:
    """Quantum relative entropy ``D(rho || sigma)`` in nats.

    Raises :class:`SupportViolation` when ``rho`` has weight outside the
    support of ``sigma`` (the value is then infinite).
    """
    rho = as_matrix(rho)
    sigma = as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"{rho.shape} vs {sigma.shape}")
    rs = _state_eigenvalues(rho)
    return float(np.sum(_xlogx(rs.eigenvalues))) - _cross_term(rs, sigma)


def log_psd(rho) -> HermitianSpectrum:
    """Spectrum of a state with eigenvalues clamped at zero (caller takes logs)."""
    return _state_eigenvalues(as_matrix(rho))


def is_unitary(u, tol: float = 1e-12) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))) <= tol
