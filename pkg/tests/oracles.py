"""Reference computations written without the library's algorithms.

Rotations come from matrix exponentials, circuits from explicit Kronecker
products, and matrix functions from dense eigendecompositions.
"""

import numpy as np
from scipy.linalg import eig, eigh, expm, logm

Z = np.diag([1.0, -1.0]).astype(complex)
Y = np.array([[0, -1j], [1j, 0]])


def rz(a):
    return expm(-0.5j * a * Z)


def ry(t):
    return expm(-0.5j * t * Y)


def laurent_sum(coeffs, degree, x):
    """``sum_j c_j e^{i j x / 2}`` with ``coeffs[j + degree]`` holding ``c_j``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape, dtype=complex)
    for idx, c in enumerate(coeffs):
        j = idx - degree
        out += c * (np.cos(j * x / 2) + 1j * np.sin(j * x / 2))
    return out


def qsp_matrix(omega, thetas, phis, x):
    """``W(x)`` as one explicit product of exponentials."""
    M = rz(omega) @ ry(thetas[0]) @ rz(phis[0])
    for t, p in zip(thetas[1:], phis[1:]):
        M = M @ rz(x) @ ry(t) @ rz(p)
    return M


def qpp_matrix(omega, thetas, phis, U):
    """Phase processor assembled from full-width gate matrices."""
    d = U.shape[0]
    I = np.eye(d)
    P0 = np.diag([1.0, 0.0])
    P1 = np.diag([0.0, 1.0])
    M = np.kron(rz(omega) @ ry(thetas[0]) @ rz(phis[0]), I)
    for l in range(1, len(thetas)):
        if l % 2:
            C = np.kron(P0, U.conj().T) + np.kron(P1, I)
        else:
            C = np.kron(P0, I) + np.kron(P1, U)
        M = M @ C @ np.kron(ry(thetas[l]) @ rz(phis[l]), I)
    return M


def unitary_function(U, f):
    """``sum_j f(tau_j) |chi_j><chi_j|`` through scipy's general eigensolver.

    Eigenvectors of degenerate eigenvalues are orthonormalized per cluster.
    """
    w, V = eig(U)
    tau = np.angle(w)
    order = np.argsort(tau)
    tau, V = tau[order], V[:, order]
    out = np.zeros_like(U, dtype=complex)
    start = 0
    while start < len(tau):
        stop = start + 1
        while stop < len(tau) and abs(tau[stop] - tau[start]) < 1e-8:
            stop += 1
        Qm, _ = np.linalg.qr(V[:, start:stop])
        out += f(tau[start]) * Qm @ Qm.conj().T
        start = stop
    return out


def spectral_sum(U, rho, f):
    """``tr(rho f(U))``."""
    return complex(np.trace(rho @ unitary_function(U, f)))


def evolution(H, t):
    return expm(-1j * t * H)


def von_neumann(rho):
    p = eigh(rho, eigvals_only=True)
    p = p[p > 1e-15]
    return float(-np.sum(p * np.log(p)))


def relative_entropy(rho, sigma):
    return float(np.real(np.trace(rho @ (logm(rho) - logm(sigma)))))


def renyi(rho, alpha):
    p = eigh(rho, eigvals_only=True)
    p = p[p > 1e-15]
    return float(np.log(np.sum(p**alpha)) / (1 - alpha))


def coeffs_from_roots(r, lead, n):
    """Coefficients of ``lead * prod(xi - r_k)`` from its values at the ``n + 1`` roots of unity.

    Expanding the product term by term loses all accuracy near degree 80.
    """
    N = n + 1
    w = np.exp(2j * np.pi * np.arange(N) / N)
    return np.fft.fft(lead * np.prod(w[:, None] - np.asarray(r)[None, :], axis=1)) / N
