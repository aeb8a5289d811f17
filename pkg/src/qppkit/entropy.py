"""Entropy estimation from one ancilla measurement.

The phase processing circuit runs on the qubitized encoding of ``sigma`` with
input ``|0>|0...0>|Psi_rho>``, where ``Psi_rho`` purifies ``rho`` onto a
spectator register. Its ancilla ``Z`` expectation is ``tr(rho f(sigma))`` for
a real polynomial ``f`` bounded by one on ``[-1, 1]``, because the flagged
phases ``+-arccos(p_j)`` map back to ``p_j`` under ``f(cos x)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from . import tolerances
from .approx import RealPoly, compose_cosine, log_poly, monomial_shift_poly, power_poly, real_sup
from .blockenc import QubitizedEncoding, density_block_encoding, purified_oracle
from .errors import ConditioningError, ContractError
from .linalg import check_density, check_unitary, dagger, num_qubits
from .phasesearch import QpsConfig, amplitude_estimation
from .qpp import build, sample_z, stream
from .qsp import AngleSet, angles_for_expectation

KINDS = ("von_neumann", "relative", "renyi")
SAMPLERS = ("born", "amplitude")
MAX_SHOTS = 10_000_000
# Chebyshev factor: |mean - E| <= sqrt(CONFIDENCE * var / shots) with probability >= 0.9
CONFIDENCE = 10.0


@dataclass(frozen=True)
class EntropyRequest:
    """``shots=None`` selects exact mode; ``shots="auto"`` picks a budget adaptively.

    ``sampler="amplitude"`` replaces Born-rule shots by amplitude estimation
    on the same circuit (``shots`` must then be ``"auto"``).
    """

    kind: str = "von_neumann"
    alpha: float | None = None
    gamma: float | None = None
    kappa: int | None = None
    eps: float = 1e-2
    shots: int | str | None = None
    seed: int | None = None
    sampler: str = "born"

    def __post_init__(self):
        if self.sampler not in SAMPLERS:
            raise ContractError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")
        if self.sampler == "amplitude" and self.shots != "auto":
            raise ContractError("the amplitude sampler sets its own budget; use shots='auto'")
        if self.kind not in KINDS:
            raise ContractError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0 < self.eps < 1:
            raise ContractError(f"eps must lie in (0, 1), got {self.eps}")
        if self.kind == "renyi":
            if self.alpha is None or self.alpha <= 0:
                raise ContractError("renyi needs alpha > 0")
            if self.alpha == 1:
                raise ContractError("alpha = 1 is the von Neumann entropy; use kind='von_neumann'")
        needs_floor = self.kind != "renyi" or not float(self.alpha).is_integer()
        if needs_floor and self.gamma is None and self.kappa is None:
            raise ContractError(f"{self.kind} needs gamma or kappa")
        if self.gamma is not None and not 0 < self.gamma < 1:
            raise ContractError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.kappa is not None and self.kappa < 1:
            raise ContractError("kappa must be a positive integer")
        if isinstance(self.shots, str) and self.shots != "auto":
            raise ContractError(f"shots must be an integer, 'auto' or None, got {self.shots!r}")
        if isinstance(self.shots, int) and self.shots < 1:
            raise ContractError("shots must be at least 1")

    @property
    def exact(self) -> bool:
        return self.shots is None

    def threshold(self) -> float:
        """Eigenvalue floor; from the rank as ``eps / (16 kappa ln(kappa / eps))`` if not given."""
        if self.gamma is not None:
            return float(self.gamma)
        k, e = self.kappa, self.eps
        return e / (16 * k * math.log(max(k / e, math.e)))


@dataclass
class EntropyResult:
    estimate: float
    half_width: float
    shots_used: int
    queries: int
    expectations: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class PurifiedState:
    """A purified query oracle, usable wherever a density matrix is accepted."""

    unitary: np.ndarray

    def __post_init__(self):
        U = check_unitary(self.unitary)
        if num_qubits(U.shape[0]) % 2:
            raise ContractError("a purified oracle acts on an even number of qubits")
        object.__setattr__(self, "unitary", U)

    @property
    def dim(self) -> int:
        return math.isqrt(self.unitary.shape[0])

    @property
    def rho(self) -> np.ndarray:
        psi = self.unitary[:, 0].reshape(self.dim, self.dim)
        return psi @ dagger(psi)


def _as_oracle(state) -> PurifiedState:
    if isinstance(state, PurifiedState):
        return state
    return PurifiedState(purified_oracle(check_density(state)))


# angle sets keyed by polynomial class and coefficient bytes
_ANGLE_CACHE: dict[tuple[str, bytes], AngleSet] = {}


def _angles_for(f: RealPoly) -> AngleSet:
    coef = np.asarray(f.coef, dtype=float)
    key = (type(f).__name__, coef.tobytes())
    if key not in _ANGLE_CACHE:
        top = real_sup(f)
        if top > 1 + tolerances.TOL.bound_slack:
            raise ContractError(f"|f| reaches {top:.12f} > 1 on [-1, 1]")
        _ANGLE_CACHE[key] = angles_for_expectation(compose_cosine(f))
    return _ANGLE_CACHE[key]


@dataclass(frozen=True, eq=False)
class TraceCircuit:
    """Ancilla, then the qubitized register of ``sigma``, then the purifying register of ``rho``."""

    angles: AngleSet
    sigma: QubitizedEncoding
    rho: PurifiedState

    @property
    def num_qubits(self) -> int:
        return 1 + num_qubits(self.sigma.unitary.shape[0]) + num_qubits(self.rho.dim)

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return (0,)

    @property
    def queries(self) -> int:
        """Uses of ``U_rho`` or its inverse: one to prepare, two per qubitized step."""
        return 1 + 2 * self.angles.layers

    def final_state(self) -> np.ndarray:
        d = self.rho.dim
        if self.sigma.system_dim != d:
            raise ContractError(f"rho has dimension {d}, sigma has {self.sigma.system_dim}")
        dU = self.sigma.unitary.shape[0]
        s = np.zeros((2, dU, d), dtype=complex)
        s[0, :d, :] = self.rho.unitary[:, 0].reshape(d, d)
        return stream(self.angles, self.sigma.unitary, s)

    def unitary(self) -> np.ndarray:
        """Dense matrix of preparation followed by the phase processor.

        Register order is ancilla, flags, system, spectator; the purified
        oracle acts on system and spectator.
        """
        d = self.rho.dim
        V = build(self.angles, self.sigma.unitary).matrix()
        flags = self.sigma.unitary.shape[0] // d
        prep = np.kron(np.eye(2 * flags), self.rho.unitary)
        return np.kron(V, np.eye(d)) @ prep

    def expectation(self) -> float:
        s = self.final_state()
        return float(np.sum(np.abs(s[0]) ** 2) - np.sum(np.abs(s[1]) ** 2))


def trace_rho_f_sigma(rho_oracle, sigma_qubitized: QubitizedEncoding, f: RealPoly, shots=None, seed=None) -> float:
    """``tr(rho f(sigma))`` read from the ancilla; ``shots=None`` gives the exact expectation."""
    circ = TraceCircuit(_angles_for(f), sigma_qubitized, _as_oracle(rho_oracle))
    E = circ.expectation()
    if shots is None:
        return E
    return sample_z(E, int(shots), seed)


def _measure(circ: TraceCircuit, req: EntropyRequest, factor: float, rng) -> tuple[float, int, float, int]:
    """Expectation, shots used, half-width after scaling by ``factor``, and oracle queries."""
    E = circ.expectation()
    if req.exact:
        return E, 0, 0.0, circ.queries
    if req.sampler == "amplitude":
        return _measure_amplitude(circ, req, factor, rng)
    if req.shots == "auto":
        n = max(1, math.ceil((factor / req.eps) ** 2))
        while True:
            mean = sample_z(E, n, rng)
            hw = factor * math.sqrt(CONFIDENCE * max(1 - mean**2, 1 / n) / n)
            if hw <= req.eps / 2 or n >= MAX_SHOTS:
                return mean, n, hw, circ.queries * n
            n = min(2 * n, MAX_SHOTS)
    n = int(req.shots)
    mean = sample_z(E, n, rng)
    return mean, n, factor * math.sqrt(CONFIDENCE / n), circ.queries * n


def _measure_amplitude(circ: TraceCircuit, req: EntropyRequest, factor: float, rng) -> tuple[float, int, float, int]:
    """Ancilla expectation ``E = 1 - 2 a^2`` from amplitude estimation of ``a``.

    A phase error ``delta`` moves ``a`` by at most ``delta / 2`` and ``E`` by at
    most ``2 delta``, so ``delta = eps / (4 factor)`` keeps the scaled half-width
    at ``eps / 2``. Each Grover step uses the circuit and its inverse once.
    """
    delta = min(0.25, req.eps / (4 * factor))
    res = amplitude_estimation(circ.unitary(), QpsConfig(delta=delta), rng)
    E = 1 - 2 * res.estimate**2
    return E, 0, 2 * factor * delta, res.queries * 2 * circ.queries


def _floor_warnings(rho: np.ndarray, gamma: float, name: str) -> list[str]:
    w = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    small = w[(w > 1e-12) & (w < gamma)]
    if small.size:
        msg = f"{name} has {small.size} eigenvalue(s) in (0, gamma = {gamma:.3g}); the error bound does not apply"
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        return [msg]
    return []


def von_neumann(rho, req: EntropyRequest) -> EntropyResult:
    """``S(rho) = -2 ln(gamma) E`` with ``E = tr(rho P(rho))`` and ``P ~ ln(x) / (2 ln gamma)``."""
    gamma = req.threshold()
    oracle = _as_oracle(rho)
    factor = 2 * math.log(1 / gamma)
    f = log_poly(gamma, req.eps / (2 * factor))
    circ = TraceCircuit(_angles_for(f), density_block_encoding(oracle.unitary), oracle)
    rng = np.random.default_rng(req.seed)
    E, shots, hw, queries = _measure(circ, req, factor, rng)
    notes = _floor_warnings(oracle.rho, gamma, "rho") if req.exact else []
    return EntropyResult(
        estimate=factor * E,
        half_width=req.eps / 2 + hw,
        shots_used=shots,
        queries=queries,
        expectations={"log": E},
        warnings=notes,
    )


def _support_violation(rho: np.ndarray, sigma: np.ndarray) -> bool:
    w, V = np.linalg.eigh((sigma + dagger(sigma)) / 2)
    K = V[:, w <= 1e-12]
    if K.shape[1] == 0:
        return False
    return float(np.real(np.trace(dagger(K) @ rho @ K))) > 1e-10


def relative_entropy(rho, sigma, req: EntropyRequest) -> EntropyResult:
    """``D(rho || sigma) = -tr(rho ln sigma) - S(rho)`` with the log polynomial applied to both."""
    gamma = req.threshold()
    r, s = _as_oracle(rho), _as_oracle(sigma)
    if r.dim != s.dim:
        raise ContractError(f"rho has dimension {r.dim}, sigma has {s.dim}")
    if _support_violation(r.rho, s.rho):
        msg = "rho is not supported on the support of sigma; the divergence is infinite"
        return EntropyResult(math.inf, 0.0, 0, 0, {}, [msg])
    factor = 2 * math.log(1 / gamma)
    f = log_poly(gamma, req.eps / (4 * factor))
    angles = _angles_for(f)
    self_circ = TraceCircuit(angles, density_block_encoding(r.unitary), r)
    cross_circ = TraceCircuit(angles, density_block_encoding(s.unitary), r)
    rng = np.random.default_rng(req.seed)
    E_rho, n1, hw1, q1 = _measure(self_circ, req, factor, rng)
    E_sigma, n2, hw2, q2 = _measure(cross_circ, req, factor, rng)
    notes = []
    if req.exact:
        notes = _floor_warnings(r.rho, gamma, "rho") + _floor_warnings(s.rho, gamma, "sigma")
    return EntropyResult(
        estimate=factor * (E_sigma - E_rho),
        half_width=req.eps / 2 + hw1 + hw2,
        shots_used=n1 + n2,
        queries=q1 + q2,
        expectations={"log_rho": E_rho, "log_sigma": E_sigma},
        warnings=notes,
    )


@dataclass(frozen=True)
class RenyiPlan:
    """Polynomial ``f`` with ``tr(rho^alpha) = factor * tr(rho f(rho))`` up to ``eps``."""

    f: RealPoly
    factor: float
    approximate: bool


def renyi_plan(alpha: float, gamma: float | None, eps: float) -> RenyiPlan:
    """Polynomial for ``x^{alpha - 1}``, scaled to fit in ``[-1, 1]``.

    ``eps`` is the allowed additive error on ``S_alpha``. Integer ``alpha``
    needs no approximation. Otherwise ``tr(rho^alpha)`` is at least
    ``min(1, gamma^{alpha - 1})`` when every nonzero eigenvalue is at least
    ``gamma``, which converts ``eps`` into a trace budget.
    """
    if alpha <= 0 or alpha == 1:
        raise ContractError(f"alpha must be positive and different from 1, got {alpha}")
    if float(alpha).is_integer():
        k = int(alpha)
        return RenyiPlan(Polynomial([0.0] * (k - 1) + [1.0]), 1.0, False)
    if gamma is None:
        raise ContractError("non-integer alpha needs gamma")
    lower = 1.0 if alpha < 1 else gamma ** (alpha - 1)
    trace_eps = abs(1 - alpha) * lower * eps / 2
    if alpha < 1:
        factor = 2 * gamma ** (alpha - 1)
        return RenyiPlan(power_poly(1 - alpha, gamma, trace_eps / (2 * factor)), factor, True)
    k = math.floor(alpha)
    factor = 2 * math.log(2 * math.e / gamma)
    shifted = monomial_shift_poly(alpha - k, gamma, trace_eps / (2 * factor))
    f = shifted * Chebyshev([0.0, 1.0]) ** (k - 1) if k > 1 else shifted
    top = real_sup(f)
    if top > 1 + tolerances.TOL.bound_slack:
        raise ConditioningError(f"product polynomial reaches {top:.12f} > 1", residual=top)
    return RenyiPlan(f, factor, True)


def renyi(rho, alpha: float, req: EntropyRequest) -> EntropyResult:
    """``S_alpha = ln(tr rho^alpha) / (1 - alpha)`` from ``tr(rho^alpha) = factor * tr(rho f(rho))``."""
    if alpha == 1:
        raise ContractError("alpha = 1 is the von Neumann entropy; use von_neumann")
    integer = float(alpha).is_integer()
    gamma = None if integer and req.gamma is None and req.kappa is None else req.threshold()
    plan = renyi_plan(alpha, gamma, req.eps)
    oracle = _as_oracle(rho)
    circ = TraceCircuit(_angles_for(plan.f), density_block_encoding(oracle.unitary), oracle)
    rng = np.random.default_rng(req.seed)
    E, shots, hw, queries = _measure(circ, req, plan.factor, rng)
    trace = plan.factor * E
    notes = []
    if req.exact and plan.approximate:
        notes = _floor_warnings(oracle.rho, gamma, "rho")
    if trace <= 0:
        notes.append(f"estimated tr(rho^alpha) = {trace:.3e} is not positive; clamped")
        trace = 1e-300
    slope = 1 / (abs(1 - alpha) * trace)
    return EntropyResult(
        estimate=math.log(trace) / (1 - alpha),
        half_width=(req.eps / 2 if plan.approximate else 0.0) + slope * hw,
        shots_used=shots,
        queries=queries,
        expectations={"power": E, "trace": trace},
        warnings=notes,
    )


def estimate(req: EntropyRequest, rho, sigma=None) -> EntropyResult:
    """Dispatch on ``req.kind``."""
    if req.kind == "von_neumann":
        return von_neumann(rho, req)
    if req.kind == "relative":
        if sigma is None:
            raise ContractError("relative entropy needs sigma")
        return relative_entropy(rho, sigma, req)
    return renyi(rho, float(req.alpha), req)


def power_traces(rho, k_max: int, shots=None, seed=None) -> np.ndarray:
    """``tr(rho^k)`` for ``k = 1..k_max`` from the exact monomials ``x^{k-1}``."""
    oracle = _as_oracle(rho)
    q = density_block_encoding(oracle.unitary)
    rng = np.random.default_rng(seed)
    out = []
    for k in range(1, k_max + 1):
        f = Polynomial([0.0] * (k - 1) + [1.0])
        out.append(trace_rho_f_sigma(oracle, q, f, shots, rng))
    return np.array(out)


def newton_girard(power_sums, trace_tol: float = 1e-2, imag_tol: float = 5e-2) -> np.ndarray:
    """Eigenvalues from ``p_k = tr(rho^k)``, ``k = 1..k_max``.

    Newton's identities ``k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} p_i`` give the
    elementary symmetric polynomials; the roots of
    ``x^k - e_1 x^{k-1} + e_2 x^{k-2} - ...`` are returned clamped to
    ``[0, 1]`` in descending order.
    """
    p = np.asarray(power_sums, dtype=float).reshape(-1)
    k_max = p.size
    if not 1 <= k_max <= 8:
        raise ContractError(f"need between 1 and 8 power sums, got {k_max}")
    if abs(p[0] - 1) > trace_tol:
        raise ContractError(f"tr(rho) = {p[0]:.6f} is not within {trace_tol} of 1")
    e = [1.0]
    for k in range(1, k_max + 1):
        acc = sum((-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1))
        e.append(acc / k)
    coeffs = [(-1) ** j * e[j] for j in range(k_max + 1)]
    r = np.roots(coeffs)
    if r.size and float(np.max(np.abs(r.imag))) > imag_tol:
        bad = float(np.max(np.abs(r.imag)))
        raise ConditioningError(f"power sums are inconsistent: root with imaginary part {bad:.3e}", residual=bad)
    vals = np.clip(np.real(r), 0.0, 1.0)
    out = np.zeros(k_max)
    out[: vals.size] = np.sort(vals)[::-1]
    return out
