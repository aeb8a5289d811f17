"""Dense linear algebra and state-vector primitives.

Matrices are plain ``numpy`` complex arrays. Qubit 0 is the most significant
bit of a basis index, so ``kron(A, B)`` puts ``A`` on qubit 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import tolerances
from .errors import ContractError

ComplexMatrix = np.ndarray
StateVector = np.ndarray


def as_matrix(M) -> ComplexMatrix:
    """Return ``M`` as a square complex array, rejecting other shapes."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ContractError(f"expected a non-empty square matrix, got shape {A.shape}")
    return A


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise ContractError(f"dimension {dim} is not a power of two")
    return n


def dagger(M: ComplexMatrix) -> ComplexMatrix:
    return np.conj(np.swapaxes(M, -1, -2))


def unitarity_residual(M) -> float:
    A = as_matrix(M)
    return float(np.max(np.abs(dagger(A) @ A - np.eye(A.shape[0]))))


def hermiticity_residual(M) -> float:
    A = as_matrix(M)
    return float(np.max(np.abs(A - dagger(A))))


def check_unitary(M, tol: float | None = None) -> ComplexMatrix:
    A = as_matrix(M)
    tol = tolerances.TOL.unitary if tol is None else tol
    res = unitarity_residual(A)
    if res > tol:
        raise ContractError(f"matrix is not unitary: max|U^dag U - I| = {res:.3e} exceeds {tol:.1e}")
    return A


def check_hermitian(M, tol: float | None = None) -> ComplexMatrix:
    A = as_matrix(M)
    tol = tolerances.TOL.hermitian if tol is None else tol
    res = hermiticity_residual(A)
    if res > tol:
        raise ContractError(f"matrix is not Hermitian: max|H - H^dag| = {res:.3e} exceeds {tol:.1e}")
    return A


def check_density(M) -> ComplexMatrix:
    """Validate a density matrix: Hermitian, PSD and unit trace."""
    pol = tolerances.TOL
    A = check_hermitian(M)
    tr = np.trace(A)
    if abs(tr - 1.0) > pol.trace:
        raise ContractError(f"density matrix trace residual |tr - 1| = {abs(tr - 1.0):.3e} exceeds {pol.trace:.1e}")
    lo = float(np.linalg.eigvalsh((A + dagger(A)) / 2)[0])
    if lo < -pol.psd:
        raise ContractError(f"density matrix is not PSD: min eigenvalue {lo:.3e} below -{pol.psd:.1e}")
    return A


def check_state(psi) -> StateVector:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    nrm = float(np.vdot(v, v).real)
    if abs(nrm - 1.0) > tolerances.TOL.norm:
        raise ContractError(f"state norm^2 = {nrm:.12f} is not within {tolerances.TOL.norm:.1e} of 1")
    return v


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with eigenvectors stored as matrix columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.eigenvalues)

    def reconstruct(self) -> ComplexMatrix:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ dagger(V)

    def residual(self, M) -> float:
        return float(np.max(np.abs(self.reconstruct() - as_matrix(M))))


def eig_unitary(U) -> Spectrum:
    """Eigendecomposition of a unitary through its complex Schur form.

    For a normal matrix the Schur factor is diagonal, so the Schur vectors are
    an orthonormal eigenbasis even under degeneracy.
    """
    A = check_unitary(U)
    T, Z = sla.schur(A, output="complex")
    lam = np.diag(T).copy()
    lam /= np.abs(lam)
    return Spectrum(lam, Z)


def eig_hermitian(H) -> Spectrum:
    """Ascending real eigenvalues and orthonormal eigenvectors."""
    A = check_hermitian(H)
    w, V = np.linalg.eigh((A + dagger(A)) / 2)
    return Spectrum(w, V)


def apply_spectral(M, fn) -> ComplexMatrix:
    """``fn`` applied to the eigenvalues of a Hermitian or unitary matrix."""
    A = as_matrix(M)
    if hermiticity_residual(A) <= tolerances.TOL.hermitian:
        s = eig_hermitian(A)
    else:
        s = eig_unitary(A)
    V = s.eigenvectors
    return (V * fn(s.eigenvalues)) @ dagger(V)


def controlled(U, control_on_zero: bool = False) -> ComplexMatrix:
    """Controlled-``U`` with the control on the most significant qubit.

    ``control_on_zero=False`` gives ``diag(I, U)``; ``True`` gives ``diag(U, I)``.
    """
    A = check_unitary(U)
    num_qubits(A.shape[0])
    d = A.shape[0]
    out = np.eye(2 * d, dtype=complex)
    if control_on_zero:
        out[:d, :d] = A
    else:
        out[d:, d:] = A
    return out


def kron_all(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def basis_state(index: int, dim: int) -> StateVector:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def _split(state: np.ndarray, qubit_index: int) -> tuple[np.ndarray, int]:
    n = num_qubits(state.shape[0])
    if not 0 <= qubit_index < n:
        raise ContractError(f"qubit index {qubit_index} out of range for {n} qubits")
    return state.reshape(1 << qubit_index, 2, -1), n


def outcome_probabilities(state, qubit_index: int) -> np.ndarray:
    """Born probabilities ``[p0, p1]`` for measuring one qubit."""
    v = np.asarray(state, dtype=complex).reshape(-1)
    t, _ = _split(v, qubit_index)
    p = np.sum(np.abs(t) ** 2, axis=(0, 2))
    return p / p.sum()


def sample_measurement(state, qubit_index: int, rng_seed) -> tuple[int, StateVector]:
    """Measure one qubit; return the outcome and the renormalized state.

    ``rng_seed`` is an integer seed or a ``numpy.random.Generator``.
    """
    v = np.asarray(state, dtype=complex).reshape(-1)
    t, _ = _split(v, qubit_index)
    weights = np.sum(np.abs(t) ** 2, axis=(0, 2))
    total = weights.sum()
    if total < tolerances.TOL.degenerate_norm:
        raise ContractError(f"state norm {total:.3e} is degenerate")
    rng = np.random.default_rng(rng_seed)
    bit = int(rng.random() * total >= weights[0])
    out = np.zeros_like(t)
    out[:, bit, :] = t[:, bit, :] / np.sqrt(weights[bit])
    return bit, out.reshape(-1)


def partial_trace(rho, keep_dim: int) -> np.ndarray:
    """Trace out the trailing factor, keeping the leading ``keep_dim`` block."""
    A = as_matrix(rho)
    rest = A.shape[0] // keep_dim
    return np.einsum("ikjk->ij", A.reshape(keep_dim, rest, keep_dim, rest))


def haar_unitary(dim: int, rng) -> ComplexMatrix:
    """Haar-random unitary from the QR factorization of a Ginibre matrix."""
    rng = np.random.default_rng(rng)
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Qm, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Qm * (d / np.abs(d))


def random_hermitian(dim: int, rng) -> ComplexMatrix:
    rng = np.random.default_rng(rng)
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (G + dagger(G)) / 2


def random_density(dim: int, rng, rank: int | None = None, min_eig: float = 0.0) -> ComplexMatrix:
    """Random density matrix of the given rank.

    With ``min_eig > 0`` the nonzero eigenvalues are at least ``min_eig``.
    """
    rng = np.random.default_rng(rng)
    rank = dim if rank is None else rank
    if min_eig * rank > 1:
        raise ContractError("min_eig * rank must not exceed 1")
    w = rng.dirichlet(np.ones(rank))
    p = min_eig + (1 - min_eig * rank) * w
    V = haar_unitary(dim, rng)[:, :rank]
    rho = (V * p) @ dagger(V)
    return (rho + dagger(rho)) / 2
