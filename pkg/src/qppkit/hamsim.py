"""Hamiltonian simulation and spectrum extraction on a qubitized block encoding.

The qubitized encoding of ``H / Lambda`` has eigenphases ``+-arccos(lambda / Lambda)``,
so a trigonometric polynomial close to ``exp(-i Lambda t cos x)`` turns its
flagged block into ``exp(-i H t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .approx import jacobi_anger, jacobi_anger_order
from .blockenc import QubitizedEncoding, encode_hermitian, flagged_lift, qubitize
from .errors import ContractError
from .linalg import check_hermitian, check_state, dagger, eig_hermitian, num_qubits
from .phasesearch import QpsConfig, quantum_phase_search
from .qpp import build
from .qsp import angles_for_projection

MAX_SYSTEM_QUBITS = 3


@dataclass(frozen=True, eq=False)
class SimRequest:
    """``Lambda=None`` uses ``max(1, ||H||)``."""

    H: np.ndarray
    t: float
    delta: float = 1e-3
    Lambda: float | None = None

    def __post_init__(self):
        Hm = check_hermitian(self.H)
        if num_qubits(Hm.shape[0]) > MAX_SYSTEM_QUBITS:
            raise ContractError(f"at most {MAX_SYSTEM_QUBITS} system qubits are supported")
        if not 0 < self.delta < 1:
            raise ContractError(f"delta must lie in (0, 1), got {self.delta}")
        object.__setattr__(self, "H", Hm)
        if self.Lambda is None:
            object.__setattr__(self, "Lambda", max(1.0, float(np.linalg.norm(Hm, 2))))


@dataclass
class SimResult:
    block: np.ndarray
    truncation_order: int
    queries: int
    success_probability: float
    theta_expression: float

    @property
    def query_ratio(self) -> float:
        """Queries relative to ``Lambda|t| + log(2/delta^2) / log(e + log(2/delta^2)/(Lambda|t|))``."""
        return self.queries / self.theta_expression if self.theta_expression else math.inf


def qubitized_hamiltonian(H, Lambda: float) -> QubitizedEncoding:
    return qubitize(encode_hermitian(H, Lambda))


def simulate(req: SimRequest) -> SimResult:
    """Flagged block of the phase processor realizing the Jacobi-Anger series.

    Queries count controlled applications of the qubitized encoding, one per
    layer; an order-``N`` series uses ``2N`` layers. The success probability is
    the smallest squared singular value of the block, i.e. the worst-case
    chance of finding all ancillas in zero.
    """
    q = qubitized_hamiltonian(req.H, req.Lambda)
    z = req.Lambda * req.t
    F = jacobi_anger(z, req.delta)
    N = F.degree // 2
    circ = build(angles_for_projection(F), q.unitary) if N else None
    d = q.system_dim
    if circ is None:
        block = np.eye(d, dtype=complex) * F.coeff(0)
        layers = 0
    else:
        block = circ.matrix()[:d, :d]
        layers = circ.layers
    smin = float(np.linalg.svd(block, compute_uv=False).min())
    return SimResult(block, N, layers, smin**2, jacobi_anger_order(z, req.delta))


def exact_evolution(H, t: float) -> np.ndarray:
    """``exp(-i H t)`` from the Hermitian eigendecomposition."""
    s = eig_hermitian(H)
    V = s.eigenvectors
    return (V * np.exp(-1j * t * s.eigenvalues)) @ dagger(V)


def error_vs_exact(block: np.ndarray, H, t: float) -> float:
    """Spectral norm of the difference from the exact evolution."""
    return float(np.linalg.norm(block - exact_evolution(H, t), 2))


@dataclass
class SpectrumEstimate:
    eigenvalue: float
    phase: float
    queries: int
    postselect_probability: float
    state: np.ndarray | None


def extract_spectrum(H, Lambda: float, config: QpsConfig = QpsConfig(), rng=None, initial_states=None) -> list[SpectrumEstimate]:
    """One eigenvalue estimate ``Lambda cos(tau)`` per initial system state.

    Each state is lifted to ``|0...0> x psi``; phase search collapses it onto
    a rotation eigenvector, and post-selecting the flags on all zeros (chance
    one half, or one when ``|lambda| = Lambda``) leaves the corresponding eigenvector of ``H``. The default
    initial states are the computational basis states.
    """
    q = qubitized_hamiltonian(H, Lambda)
    d = q.system_dim
    states = np.eye(d, dtype=complex) if initial_states is None else initial_states
    rng = np.random.default_rng(rng)
    out = []
    for psi in states:
        lifted = flagged_lift(q, check_state(psi))
        res = quantum_phase_search(q.unitary, lifted, config, rng)
        head = res.state[:d]
        prob = float(np.vdot(head, head).real)
        vec = head / math.sqrt(prob) if prob > 1e-12 else None
        out.append(SpectrumEstimate(Lambda * math.cos(res.estimate), res.estimate, res.queries, prob, vec))
    return out
