"""Phase processing circuits: single-qubit signal processing lifted to a unitary.

The ancilla is qubit 0. Layer ``l`` applies ``Ry(theta_l) Rz(phi_l)`` on the
ancilla and then ``diag(U^dag, I)`` for odd ``l`` or ``diag(I, U)`` for even
``l``; layer ``L`` acts first and the head rotations act last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .laurent import LaurentPoly
from .linalg import ComplexMatrix, as_matrix, check_density, check_unitary, dagger, eig_unitary, num_qubits
from .qsp import AngleSet, angles_for_expectation, angles_for_projection, qsp_unitary


@dataclass(frozen=True, eq=False)
class QppCircuit:
    angles: AngleSet
    target_unitary: np.ndarray

    @property
    def layers(self) -> int:
        return self.angles.layers

    @property
    def system_dim(self) -> int:
        return self.target_unitary.shape[0]

    @property
    def num_qubits(self) -> int:
        """Total width: the system plus one ancilla."""
        return num_qubits(self.system_dim) + 1

    @property
    def queries(self) -> int:
        """Applications of controlled-``U`` or controlled-``U^dag``."""
        return self.layers

    def matrix(self) -> ComplexMatrix:
        """The full ``2d x 2d`` matrix, assembled block by block."""
        return _assemble(self.angles, self.target_unitary)

    def apply(self, state) -> np.ndarray:
        """Apply the circuit to a state on ancilla, system and optional trailing qubits."""
        v = np.asarray(state, dtype=complex).reshape(-1)
        d = self.system_dim
        if v.size % (2 * d):
            raise ContractError(f"state of size {v.size} does not fit ancilla + system dimension {2 * d}")
        return stream(self.angles, self.target_unitary, v.reshape(2, d, -1)).reshape(-1)


def build(angles: AngleSet, U) -> QppCircuit:
    A = check_unitary(U)
    num_qubits(A.shape[0])
    return QppCircuit(angles, A)


def _right_rot(M: np.ndarray, g: np.ndarray, d: int) -> np.ndarray:
    """``M @ kron(g, I_d)``."""
    left, right = M[:, :d], M[:, d:]
    return np.concatenate([left * g[0, 0] + right * g[1, 0], left * g[0, 1] + right * g[1, 1]], axis=1)


def _assemble(a: AngleSet, U: np.ndarray) -> np.ndarray:
    d = U.shape[0]
    Ud = dagger(U)
    M = np.kron(a.head(), np.eye(d))
    for l in range(1, a.layers + 1):
        if l % 2:
            M[:, :d] = M[:, :d] @ Ud
        else:
            M[:, d:] = M[:, d:] @ U
        M = _right_rot(M, a.layer(l), d)
    return M


def stream(a: AngleSet, U: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Gate-by-gate application to a state of shape ``(2, d, extra)``.

    ``U`` is used as given, without validation.
    """
    d = U.shape[0]
    s = np.array(state, dtype=complex).reshape(2, d, -1)
    extra = s.shape[2]
    Ud = dagger(U)
    s = s.reshape(2, -1)
    for l in range(a.layers, 0, -1):
        s = a.layer(l) @ s
        if l % 2:
            s[0] = (Ud @ s[0].reshape(d, extra)).reshape(-1)
        else:
            s[1] = (U @ s[1].reshape(d, extra)).reshape(-1)
    s = a.head() @ s
    return s.reshape(2, d, extra)


def verify_eigenspace(circ: QppCircuit) -> float:
    """Largest deviation of the circuit from ``(+) (e^{-i tau_j/2})^{L mod 2} W(tau_j)``.

    Works in the basis ``|a, chi_j>`` of eigenvectors of ``U`` and compares
    every matrix element, so off-block leakage counts too.
    """
    spec = eig_unitary(circ.target_unitary)
    d = circ.system_dim
    B = np.kron(np.eye(2), spec.eigenvectors)
    M = dagger(B) @ circ.matrix() @ B
    tau = spec.phases
    W = qsp_unitary(circ.angles, tau)
    if circ.layers % 2:
        W = W * np.exp(-0.5j * tau)[:, None, None]
    expected = np.zeros_like(M)
    j = np.arange(d)
    for r in range(2):
        for c in range(2):
            expected[r * d + j, c * d + j] = W[:, r, c]
    return float(np.max(np.abs(M - expected)))


def phase_evolve(F: LaurentPoly, U) -> ComplexMatrix:
    """The top-left system block of the circuit realizing ``F`` by projection.

    Approximates ``F(U) = sum_j F(tau_j) |chi_j><chi_j|``.
    """
    circ = build(angles_for_projection(F), U)
    d = circ.system_dim
    return circ.matrix()[:d, :d]


def z_expectation(circ: QppCircuit, rho) -> float:
    """``tr[(Z x I) V (|0><0| x rho) V^dag]`` for a density matrix ``rho`` on the system."""
    R = as_matrix(rho)
    d = circ.system_dim
    if R.shape[0] != d:
        raise ContractError(f"rho has dimension {R.shape[0]}, circuit system has {d}")
    M = circ.matrix()
    top, bottom = M[:d, :d], M[d:, :d]
    return float(np.real(np.trace(top @ R @ dagger(top)) - np.trace(bottom @ R @ dagger(bottom))))


def sample_z(expectation: float, shots: int, rng) -> float:
    """Mean of ``shots`` Born-rule samples of ``Z`` (values +1 or -1)."""
    if shots < 1:
        raise ContractError("shots must be at least 1")
    p0 = min(max((1 + expectation) / 2, 0.0), 1.0)
    zeros = np.random.default_rng(rng).binomial(shots, p0)
    return float(2 * zeros / shots - 1)


def _evaluation_circuit(F: LaurentPoly, U, rho) -> tuple[QppCircuit, np.ndarray]:
    circ = build(angles_for_expectation(F), U)
    R = check_density(rho)
    if R.shape[0] != circ.system_dim:
        raise ContractError(f"rho has dimension {R.shape[0]}, U has {circ.system_dim}")
    return circ, R


def phase_evaluate(F: LaurentPoly, U, rho) -> float:
    """Exact ancilla ``Z`` expectation, which equals ``sum_j <chi_j|rho|chi_j> F(tau_j)``."""
    circ, R = _evaluation_circuit(F, U, rho)
    return z_expectation(circ, R)


def phase_evaluate_sampled(F: LaurentPoly, U, rho, shots: int, seed) -> float:
    """Shot estimate of :func:`phase_evaluate` from ``shots`` single-qubit measurements."""
    circ, R = _evaluation_circuit(F, U, rho)
    return sample_z(z_expectation(circ, R), shots, seed)
