import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import qpp_matrix, qsp_matrix, spectral_sum, unitary_function
from qppkit.approx import jacobi_anger
from qppkit.errors import ContractError
from qppkit.laurent import LaurentPoly
from qppkit.linalg import haar_unitary, random_density
from qppkit.qpp import (
    build,
    phase_evaluate,
    phase_evaluate_sampled,
    phase_evolve,
    sample_z,
    verify_eigenspace,
    z_expectation,
)
from qppkit.qsp import AngleSet

seeds = st.integers(0, 2**32 - 1)
COS = LaurentPoly.from_fourier([0.5, 0, 0.5])
SIN = LaurentPoly.from_fourier([0.5j, 0, -0.5j])


def test_zero_layers_is_head_on_ancilla(rng):
    a = AngleSet.random(0, rng)
    U = haar_unitary(4, rng)
    assert np.allclose(build(a, U).matrix(), np.kron(qsp_matrix(a.omega, a.thetas, a.phis, 0.0), np.eye(4)))


def test_identity_target_gives_w_of_zero(rng):
    a = AngleSet.random(5, rng)
    M = build(a, np.eye(2)).matrix()
    assert np.allclose(M, np.kron(qsp_matrix(a.omega, a.thetas, a.phis, 0.0), np.eye(2)))


def test_matches_gate_product(rng):
    a = AngleSet.random(6, rng)
    U = haar_unitary(4, rng)
    assert np.max(np.abs(build(a, U).matrix() - qpp_matrix(a.omega, a.thetas, a.phis, U))) <= 1e-10


@given(seeds, st.integers(0, 12), st.sampled_from([2, 4, 8]))
def test_matches_gate_product_property(seed, L, d):
    rng = np.random.default_rng(seed)
    a, U = AngleSet.random(L, rng), haar_unitary(d, rng)
    M = build(a, U).matrix()
    assert np.max(np.abs(M - qpp_matrix(a.omega, a.thetas, a.phis, U))) <= 1e-10
    assert np.max(np.abs(M.conj().T @ M - np.eye(2 * d))) <= 1e-9


def test_dimension_and_unitarity_errors():
    with pytest.raises(ContractError):
        build(AngleSet.random(1, 0), np.eye(3))
    with pytest.raises(ContractError):
        build(AngleSet.random(1, 0), np.array([[1, 1], [0, 1]]))


def test_eigenspace_pauli_z():
    circ = build(AngleSet.random(7, 1), np.diag([1.0, -1.0]))
    assert verify_eigenspace(circ) <= 1e-9


def test_eigenspace_odd_prefactor(rng):
    # block of |0,chi>, |1,chi> equals exp(-i tau/2) W(tau) for odd L
    a = AngleSet.random(9, rng)
    U = haar_unitary(8, rng)
    M = build(a, U).matrix()
    w, V = np.linalg.eig(U)
    for lam, v in zip(w, V.T):
        v = v / np.linalg.norm(v)
        basis = np.stack([np.kron([1, 0], v), np.kron([0, 1], v)], axis=1)
        block = basis.conj().T @ M @ basis
        tau = np.angle(lam)
        ref = np.exp(-0.5j * tau) * qsp_matrix(a.omega, a.thetas, a.phis, tau)
        assert np.max(np.abs(block - ref)) <= 1e-9
    assert verify_eigenspace(build(a, U)) <= 1e-8


@given(seeds, st.integers(0, 12), st.sampled_from([2, 4, 8]))
def test_eigenspace_property(seed, L, d):
    rng = np.random.default_rng(seed)
    assert verify_eigenspace(build(AngleSet.random(L, rng), haar_unitary(d, rng))) <= 1e-8


@given(seeds, st.integers(0, 12), st.integers(1, 3))
def test_streaming_matches_dense(seed, L, extra):
    rng = np.random.default_rng(seed)
    circ = build(AngleSet.random(L, rng), haar_unitary(4, rng))
    psi = rng.standard_normal((8, extra)) + 1j * rng.standard_normal((8, extra))
    dense = np.kron(circ.matrix(), np.eye(extra)) @ psi.reshape(-1)
    assert np.allclose(circ.apply(psi.reshape(-1)), dense, atol=1e-12)


def test_phase_evolve_trivial(rng):
    U = haar_unitary(4, rng)
    assert np.allclose(phase_evolve(LaurentPoly.constant(1.0), U), np.eye(4), atol=1e-8)
    assert np.allclose(phase_evolve(LaurentPoly.from_fourier([0, 0, 1]), U), U, atol=1e-8)


def test_phase_evolve_jacobi_anger(rng):
    U = haar_unitary(4, rng)
    delta = 1e-3
    F = jacobi_anger(1.0, delta)
    ref = unitary_function(U, lambda tau: np.exp(-1j * np.cos(tau)))
    assert np.max(np.abs(phase_evolve(F, U) - ref)) <= delta**2 / 2 + 1e-6


def test_hadamard_test_value(rng):
    tau = 0.83
    U = np.diag([np.exp(1j * tau), np.exp(-0.4j)])
    rho = np.diag([1.0, 0.0])
    assert abs(phase_evaluate(COS, U, rho) - math.cos(tau)) <= 1e-8
    assert abs(phase_evaluate(COS, U, rho) - np.real(U[0, 0])) <= 1e-8


def test_cosine_on_pauli_z_mixed():
    assert abs(phase_evaluate(COS, np.diag([1.0, -1.0]), np.eye(2) / 2)) <= 1e-8


def test_sine_quarter_turn():
    U = np.diag([1.0, np.exp(1j * math.pi / 4)])
    assert abs(phase_evaluate(SIN, U, np.diag([0.0, 1.0])) - math.sqrt(2) / 2) <= 1e-8


@given(seeds, st.integers(1, 6), st.sampled_from([2, 4]))
def test_phase_evaluate_matches_spectral_sum(seed, K, d):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(K + 1) + 1j * rng.standard_normal(K + 1)
    c[0] = c[0].real
    F = LaurentPoly.from_fourier(np.concatenate([np.conj(c[:0:-1]), c]))
    F = F * (0.95 / np.max(np.abs(F(np.linspace(-np.pi, np.pi, 4001)))))
    U, rho = haar_unitary(d, rng), random_density(d, rng)
    ref = spectral_sum(U, rho, lambda t: F(t).real).real
    assert abs(phase_evaluate(F, U, rho) - ref) <= 1e-6


def test_sampled_estimate_converges(rng):
    U, rho = haar_unitary(4, rng), random_density(4, rng)
    exact = phase_evaluate(COS, U, rho)
    shots = 4000
    hits = sum(abs(phase_evaluate_sampled(COS, U, rho, shots, s) - exact) <= 5 / math.sqrt(shots) for s in range(100))
    assert hits >= 95


def test_sample_z_validates():
    with pytest.raises(ContractError):
        sample_z(0.0, 0, 0)
    assert sample_z(1.0, 10, 0) == 1.0


def test_z_expectation_rejects_wrong_dimension(rng):
    circ = build(AngleSet.random(2, rng), haar_unitary(4, rng))
    with pytest.raises(ContractError):
        z_expectation(circ, np.eye(2) / 2)
