import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import eigh

from qppkit.blockenc import (
    BlockEncoding,
    complete_basis,
    density_block_encoding,
    encode_hermitian,
    flagged_lift,
    purification,
    purified_oracle,
    qubitize,
    reflector,
    swap_registers,
)
from qppkit.errors import ContractError
from qppkit.linalg import partial_trace, random_density, random_hermitian

seeds = st.integers(0, 2**32 - 1)
Z = np.diag([1.0, -1.0])


def arccos_multiset(lams):
    """``{+-arccos(lambda)}`` with a single entry where ``lambda = +-1``."""
    out = []
    for lam in np.clip(lams, -1, 1):
        a = math.acos(lam)
        out += [a] if abs(abs(lam) - 1) < 1e-9 else [a, -a]
    return np.sort(out)


def wrapped_close(a, b, tol):
    # pi and -pi are the same phase
    a, b = np.sort(np.abs(a)), np.sort(np.abs(b))
    return a.shape == b.shape and np.max(np.abs(a - b)) <= tol


def test_encode_pauli_z():
    be = encode_hermitian(Z, 1.0)
    assert np.allclose(be.block, Z)
    assert be.ancillas == 1 and be.system_qubits == 1


def test_encode_zero_is_swap_like():
    be = encode_hermitian(np.zeros((2, 2)), 1.0)
    assert np.allclose(be.block, 0)
    assert np.allclose(be.unitary, np.kron([[0, 1], [1, 0]], np.eye(2)))


def test_encode_random_at_norm(rng):
    H = random_hermitian(4, rng)
    lam = np.linalg.norm(H, 2)
    be = encode_hermitian(H, lam)
    assert np.max(np.abs(be.block - H / lam)) <= 1e-9
    assert np.allclose(be.encoded, H)


def test_encode_rejects_small_scale(rng):
    H = random_hermitian(2, rng)
    with pytest.raises(ContractError):
        encode_hermitian(H, 0.5 * np.linalg.norm(H, 2))


def test_block_norm_checked():
    U = np.kron(np.eye(2), np.eye(2))
    assert BlockEncoding(U, 1).block.shape == (2, 2)
    with pytest.raises(ContractError):
        BlockEncoding(U, 3)


def test_qubitize_identity_block():
    q = qubitize(encode_hermitian(np.eye(2), 1.0))
    phases, leak = q.flagged_phases()
    assert np.allclose(phases, 0, atol=1e-7) and leak <= 1e-8


def test_qubitize_pauli_z():
    phases, _ = qubitize(encode_hermitian(Z, 1.0)).flagged_phases()
    assert wrapped_close(phases, [0.0, math.pi], 1e-7)


@given(seeds, st.sampled_from([2, 4]))
def test_qubitized_spectral_law(seed, d):
    rng = np.random.default_rng(seed)
    H = random_hermitian(d, rng)
    lam = max(1.0, 1.25 * np.linalg.norm(H, 2))
    q = qubitize(encode_hermitian(H, lam))
    phases, leak = q.flagged_phases()
    ref = arccos_multiset(eigh(H / lam, eigvals_only=True))
    assert leak <= 1e-8
    assert np.max(np.abs(phases - ref)) <= 1e-7
    # the full spectrum of the qubitized unitary contains every +-arccos(lambda)
    full = np.angle(np.linalg.eigvals(q.unitary))
    assert all(np.min(np.abs(np.exp(1j * full) - np.exp(1j * r))) <= 1e-7 for r in ref)


@given(seeds)
def test_pre_reflection_squares_to_identity_on_lifts(seed):
    rng = np.random.default_rng(seed)
    H = random_hermitian(4, rng)
    q = qubitize(encode_hermitian(H, max(1.0, np.linalg.norm(H, 2))))
    _, V = eigh(H)
    for v in V.T:
        lift = flagged_lift(q, v)
        assert np.linalg.norm(q.pre_reflection @ q.pre_reflection @ lift - lift) <= 1e-8


def test_invariant_subspaces(rng):
    H = random_hermitian(4, rng)
    q = qubitize(encode_hermitian(H, max(1.0, 1.1 * np.linalg.norm(H, 2))))
    _, V = eigh(H)
    for v in V.T:
        a = flagged_lift(q, v)
        b = q.unitary @ a
        basis, _ = np.linalg.qr(np.stack([a, b], axis=1))
        image = q.unitary @ basis
        assert np.linalg.norm(image - basis @ (basis.conj().T @ image)) <= 1e-8


def test_reflector_fixes_flagged_subspace():
    R = reflector(2, 2)
    assert np.allclose(np.diag(R)[:2], 1) and np.allclose(np.diag(R)[2:], -1)


def test_complete_basis_is_unitary(rng):
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    v /= np.linalg.norm(v)
    B = complete_basis(v)
    assert np.allclose(B[:, 0], v)
    assert np.allclose(B.conj().T @ B, np.eye(8), atol=1e-12)
    assert np.array_equal(complete_basis(v), B)


def test_purification_of_pure_state():
    psi = purification(np.diag([1.0, 0.0]))
    assert np.allclose(np.abs(psi), [1, 0, 0, 0])


def test_purification_of_maximally_mixed():
    psi = purification(np.eye(2) / 2)
    assert np.allclose(np.abs(psi), np.array([1, 0, 0, 1]) / math.sqrt(2))


@given(seeds)
def test_purified_oracle_partial_trace(seed):
    rho = random_density(4, seed)
    U = purified_oracle(rho)
    psi = U[:, 0]
    assert np.max(np.abs(partial_trace(np.outer(psi, psi.conj()), 4) - rho)) <= 1e-9
    assert np.allclose(U.conj().T @ U, np.eye(16), atol=1e-10)


def test_swap_registers():
    S = swap_registers(1)
    a, b, c = np.array([1, 2]), np.array([3, 5]), np.array([7, 11])
    assert np.allclose(S @ np.kron(np.kron(a, b), c), np.kron(np.kron(c, b), a))


def test_density_block_pure():
    q = density_block_encoding(purified_oracle(np.diag([1.0, 0.0])))
    assert np.allclose(q.block, np.diag([1.0, 0.0]), atol=1e-10)
    phases, _ = q.flagged_phases()
    assert np.allclose(phases, [-math.pi / 2, 0, math.pi / 2], atol=1e-7)


def test_density_block_maximally_mixed():
    phases, _ = density_block_encoding(purified_oracle(np.eye(2) / 2)).flagged_phases()
    assert np.allclose(phases, [-math.pi / 3] * 2 + [math.pi / 3] * 2, atol=1e-7)


@given(seeds, st.sampled_from([2, 4]))
def test_density_block_random(seed, d):
    rho = random_density(d, seed)
    q = density_block_encoding(purified_oracle(rho))
    assert np.max(np.abs(q.block - rho)) <= 1e-8
    phases, leak = q.flagged_phases()
    assert leak <= 1e-8
    assert np.max(np.abs(phases - arccos_multiset(eigh(rho, eigvals_only=True)))) <= 1e-7
