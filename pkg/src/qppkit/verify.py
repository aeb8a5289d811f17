"""Quick self-checks of every module against dense linear-algebra references."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .blockenc import density_block_encoding, encode_hermitian, purified_oracle, qubitize
from .entropy import PurifiedState, newton_girard, trace_rho_f_sigma
from .hamsim import SimRequest, error_vs_exact, simulate
from .laurent import LaurentPoly, complement, random_poly, unit_residual
from .linalg import dagger, haar_unitary, random_density, random_hermitian
from .phasesearch import PhaseInterval, QpsConfig, phase_distance, phase_interval_search, quantum_phase_search
from .qpp import build, phase_evolve, verify_eigenspace
from .qsp import AngleSet, angles_to_polys, find_angles, round_trip_error


@dataclass
class Check:
    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.threshold)

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "passed": self.passed}


def _complement(rng) -> float:
    p = random_poly(16, rng, bound=0.9)
    return unit_residual(p, complement(p))


def _round_trip(rng) -> float:
    P, Q = angles_to_polys(AngleSet.random(10, rng))
    return round_trip_error(find_angles(P, Q), P, Q)


def _eigenspace(rng) -> float:
    return verify_eigenspace(build(AngleSet.random(9, rng), haar_unitary(4, rng)))


def _streaming(rng) -> float:
    circ = build(AngleSet.random(8, rng), haar_unitary(4, rng))
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    return float(np.max(np.abs(circ.apply(psi) - circ.matrix() @ psi)))


def _evolve_identity(rng) -> float:
    U = haar_unitary(4, rng)
    return float(np.max(np.abs(phase_evolve(LaurentPoly.from_fourier([0, 0, 1]), U) - U)))


def _qubitization(rng) -> float:
    H = random_hermitian(4, rng)
    scale = max(1.0, 1.25 * np.linalg.norm(H, 2))
    q = qubitize(encode_hermitian(H, scale))
    lam = np.linalg.eigvalsh(H / scale)
    ref = np.sort(np.concatenate([np.arccos(lam), -np.arccos(lam)]))
    phases, leak = q.flagged_phases()
    return max(float(np.max(np.abs(phases - ref))), leak)


def _density_block(rng) -> float:
    rho = random_density(4, rng)
    return float(np.max(np.abs(density_block_encoding(purified_oracle(rho)).block - rho)))


def _width(rng) -> float:
    Delta, Q = 0.3, 4
    U = np.diag([1, np.exp(1j * math.pi / 3)])
    iv, _ = phase_interval_search(U, [0, 1], PhaseInterval(-math.pi, math.pi), Delta, 1e-2, Q, None)
    return abs(iv.width - (2 * Delta + math.pi / 2 ** (Q - 1)))


def _qps(rng) -> float:
    U = np.diag([1, np.exp(1j * math.pi / 3)])
    res = quantum_phase_search(U, [0, 1], QpsConfig(delta=1e-3), rng)
    return phase_distance(res.estimate, math.pi / 3)


def _trace(rng) -> float:
    rho, sigma = random_density(2, rng), random_density(2, rng)
    q = density_block_encoding(purified_oracle(sigma))
    got = trace_rho_f_sigma(PurifiedState(purified_oracle(rho)), q, Polynomial([0, 0, 1]))
    return abs(got - float(np.real(np.trace(rho @ sigma @ sigma))))


def _newton_girard(rng) -> float:
    p = np.array([0.7, 0.2, 0.1])
    return float(np.max(np.abs(newton_girard([np.sum(p**k) for k in (1, 2, 3)]) - p)))


def _hamsim(rng) -> float:
    H = random_hermitian(4, rng)
    res = simulate(SimRequest(H, 1.0, 1e-3))
    return error_vs_exact(res.block, H, 1.0)


def _unitarity(rng) -> float:
    M = build(AngleSet.random(12, rng), haar_unitary(8, rng)).matrix()
    return float(np.max(np.abs(dagger(M) @ M - np.eye(M.shape[0]))))


CHECKS = [
    ("laurent.complement_unit_residual", _complement, 1e-10),
    ("qsp.round_trip", _round_trip, 1e-8),
    ("qpp.unitarity", _unitarity, 1e-9),
    ("qpp.eigenspace_decomposition", _eigenspace, 1e-8),
    ("qpp.streaming_matches_dense", _streaming, 1e-10),
    ("qpp.phase_evolve_identity_map", _evolve_identity, 1e-6),
    ("blockenc.qubitization_spectrum", _qubitization, 1e-7),
    ("blockenc.density_block", _density_block, 1e-8),
    ("phasesearch.width_recursion", _width, 1e-12),
    ("phasesearch.qps_precision", _qps, 1e-3),
    ("entropy.trace_rho_f_sigma", _trace, 1e-6),
    ("entropy.newton_girard", _newton_girard, 1e-9),
    ("hamsim.error_vs_exact", _hamsim, 1e-3 + 1e-5),
]


def run_checks(seed: int = 0) -> list[Check]:
    out = []
    for k, (name, fn, thr) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, k])
        out.append(Check(name, float(fn(rng)), thr))
    return out
