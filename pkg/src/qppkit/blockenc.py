"""Block encodings, qubitization and the purified density-matrix oracle.

Register order is most significant first: flag ancillas, then the system. A
block encoding's encoded matrix is the top-left system-sized block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import ContractError
from .linalg import ComplexMatrix, check_density, check_hermitian, check_unitary, dagger, num_qubits

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    """``unitary`` on ``m + n`` qubits whose flagged block is ``A / Lambda``."""

    unitary: np.ndarray
    ancillas: int
    scale: float = 1.0

    def __post_init__(self):
        U = check_unitary(self.unitary)
        total = num_qubits(U.shape[0])
        if not 0 <= self.ancillas <= total:
            raise ContractError(f"{self.ancillas} ancillas do not fit in {total} qubits")
        if self.scale < 1:
            raise ContractError(f"scale must be at least 1, got {self.scale}")
        object.__setattr__(self, "unitary", U)
        top = np.linalg.norm(self.block, 2)
        if top > 1 + tolerances.TOL.bound_slack:
            raise ContractError(f"encoded block has norm {top:.12f} > 1")

    @property
    def system_qubits(self) -> int:
        return num_qubits(self.unitary.shape[0]) - self.ancillas

    @property
    def system_dim(self) -> int:
        return 1 << self.system_qubits

    @property
    def block(self) -> ComplexMatrix:
        d = self.system_dim
        return self.unitary[:d, :d]

    @property
    def encoded(self) -> ComplexMatrix:
        """The represented operator ``Lambda * block``."""
        return self.scale * self.block


@dataclass(frozen=True, eq=False)
class QubitizedEncoding:
    """A unitary acting as a rotation by ``arccos(lambda)`` on each lifted eigenvector.

    ``flags`` leading qubits mark the flagged subspace ``|0...0> x H``.
    ``pre_reflection`` is the self-inverse unitary before the final reflector.
    """

    base: BlockEncoding
    unitary: np.ndarray
    flags: int
    pre_reflection: np.ndarray

    @property
    def system_dim(self) -> int:
        return self.unitary.shape[0] >> self.flags

    @property
    def block(self) -> ComplexMatrix:
        d = self.system_dim
        return self.unitary[:d, :d]

    def flagged_basis(self) -> np.ndarray:
        """Orthonormal basis of ``span{|0^f, psi>, U|0^f, psi>}`` over all ``psi``."""
        d = self.system_dim
        gen = np.concatenate([np.eye(self.unitary.shape[0], d), self.unitary[:, :d]], axis=1)
        Uf, s, _ = np.linalg.svd(gen, full_matrices=False)
        rank = int(np.sum(s > 1e-8 * s[0]))
        return Uf[:, :rank]

    def flagged_phases(self) -> tuple[np.ndarray, float]:
        """Sorted eigenphases of the unitary restricted to the flagged subspace.

        Also returns the invariance residual ``||(I - P) U P||``. An eigenvalue
        ``lambda = +-1`` of the block spans a one-dimensional piece and
        contributes a single phase.
        """
        B = self.flagged_basis()
        UB = self.unitary @ B
        R = dagger(B) @ UB
        leak = float(np.linalg.norm(UB - B @ R, 2))
        phases = np.angle(np.linalg.eigvals(R))
        return np.sort(phases), leak


def reflector(flags: int, system_dim: int) -> np.ndarray:
    """``(2|0^f><0^f| - I) x I``."""
    n = (1 << flags) * system_dim
    out = -np.eye(n, dtype=complex)
    out[np.arange(system_dim), np.arange(system_dim)] = 1.0
    return out


def _sqrt_complement(A: np.ndarray) -> np.ndarray:
    """``sqrt(I - A^2)`` for Hermitian ``A`` with eigenvalues clamped to ``[-1, 1]``."""
    w, V = np.linalg.eigh(A)
    s = np.sqrt(np.clip(1 - w**2, 0.0, 1.0))
    return (V * s) @ dagger(V)


def encode_hermitian(H, Lambda: float) -> BlockEncoding:
    """One-ancilla dilation ``[[A, S], [S, -A]]`` of ``A = H / Lambda``."""
    Hm = check_hermitian(H)
    Hm = (Hm + dagger(Hm)) / 2
    num_qubits(Hm.shape[0])
    norm = float(np.linalg.norm(Hm, 2))
    if Lambda < 1 or norm > Lambda * (1 + tolerances.TOL.bound_slack):
        raise ContractError(f"need Lambda >= max(1, ||H||); got Lambda = {Lambda}, ||H|| = {norm:.12f}")
    A = Hm / Lambda
    S = _sqrt_complement(A)
    U = np.block([[A, S], [S, -A]])
    return BlockEncoding(U, 1, float(Lambda))


def qubitize(be: BlockEncoding) -> QubitizedEncoding:
    """Wrap a Hermitian block encoding with one extra flag qubit.

    The extra qubit goes first. ``U~ = (H X) ctrl(U on |0>, U^dag on |1>) H``
    squares to the identity and has flagged block ``(A + A^dag)/2 = A``; the
    reflector about the all-zero flags then turns it into the rotation.
    """
    A = be.block
    res = float(np.max(np.abs(A - dagger(A))))
    if res > 1e-8:
        raise ContractError(f"encoded block is not Hermitian: residual {res:.3e}")
    U = be.unitary
    n = U.shape[0]
    C = np.zeros((2 * n, 2 * n), dtype=complex)
    C[:n, :n] = U
    C[n:, n:] = dagger(U)
    Hx = np.kron(_H, np.eye(n))
    Xx = np.kron(_X, np.eye(n))
    pre = Hx @ Xx @ C @ Hx
    flags = be.ancillas + 1
    return QubitizedEncoding(be, reflector(flags, be.system_dim) @ pre, flags, pre)


def _phase_fixed(V: np.ndarray) -> np.ndarray:
    """Rescale each column so its largest entry is real and positive."""
    idx = np.argmax(np.abs(V) > np.abs(V).max(axis=0) * (1 - 1e-9), axis=0)
    ph = V[idx, np.arange(V.shape[1])]
    return V * (np.abs(ph) / ph)


def complete_basis(v: np.ndarray) -> np.ndarray:
    """Unitary whose first column is ``v``.

    Modified Gram-Schmidt over the standard basis in index order, with one
    reorthogonalization pass; vectors that are nearly dependent are skipped.
    """
    n = v.size
    cols = [v / np.linalg.norm(v)]
    for k in range(n):
        if len(cols) == n:
            break
        w = np.zeros(n, dtype=complex)
        w[k] = 1.0
        for _ in range(2):
            for c in cols:
                w = w - np.vdot(c, w) * c
        nrm = np.linalg.norm(w)
        if nrm > 1e-6:
            cols.append(w / nrm)
    return np.stack(cols, axis=1)


def purification(rho) -> np.ndarray:
    """``sum_j sqrt(p_j) |psi_j>_A |j>_B`` with eigenvalues in descending order."""
    R = check_density(rho)
    w, V = np.linalg.eigh((R + dagger(R)) / 2)
    # stable order keeps degenerate eigenvectors in eigh order
    order = np.argsort(-w, kind="stable")
    w, V = w[order], _phase_fixed(V[:, order])
    p = np.clip(w, 0.0, None)
    p = p / p.sum()
    return (V * np.sqrt(p)).reshape(-1)


def purified_oracle(rho) -> np.ndarray:
    """Unitary on ``2n`` qubits mapping ``|0>_A |0>_B`` to a purification of ``rho``."""
    return complete_basis(purification(rho))


def swap_registers(n: int) -> np.ndarray:
    """Permutation swapping registers A and S in the order ``(A, B, S)`` of ``n`` qubits each."""
    d = 1 << n
    idx = np.arange(d**3).reshape(d, d, d)
    perm = idx.transpose(2, 1, 0).reshape(-1)
    P = np.zeros((d**3, d**3), dtype=complex)
    P[perm, np.arange(d**3)] = 1.0
    return P


def density_block_encoding(U_rho) -> QubitizedEncoding:
    """Qubitized block encoding of ``rho`` from its purified oracle.

    Registers are ``(A, B, S)``. ``U~ = (U_rho^dag x I) SWAP_{A,S} (U_rho x I)``
    is self-inverse with flagged block ``rho``, so the reflector on the ``2n``
    qubits of ``A, B`` completes the qubitization without an extra qubit.
    """
    W = check_unitary(U_rho)
    two_n = num_qubits(W.shape[0])
    if two_n % 2:
        raise ContractError("the purified oracle must act on an even number of qubits")
    n = two_n // 2
    d = 1 << n
    Wx = np.kron(W, np.eye(d))
    pre = dagger(Wx) @ swap_registers(n) @ Wx
    base = BlockEncoding(pre, two_n, 1.0)
    return QubitizedEncoding(base, reflector(two_n, d) @ pre, two_n, pre)


def flagged_lift(q: QubitizedEncoding, psi) -> np.ndarray:
    """``|0^f> x psi`` in the qubitized register."""
    v = np.zeros(q.unitary.shape[0], dtype=complex)
    v[: q.system_dim] = np.asarray(psi, dtype=complex).reshape(-1)
    return v

