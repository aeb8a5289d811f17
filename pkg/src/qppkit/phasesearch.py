"""Binary-search phase estimation with a single ancilla qubit.

A square-wave approximant evaluated through the ancilla ``Z`` expectation
splits eigenphases into ``[Delta, pi - Delta)`` (outcome 0) and
``(-pi + Delta, -Delta]`` (outcome 1). Repeated halving narrows an interval
around the phase; raising the recentred unitary to the power ``d`` magnifies
the interval so the search can continue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .approx import square_wave
from .errors import ContractError
from .linalg import check_state, check_unitary, dagger, num_qubits, outcome_probabilities, sample_measurement
from .qpp import QppCircuit, build, stream
from .qsp import AngleSet, angles_for_expectation

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class PhaseInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ContractError(f"interval [{self.lo}, {self.hi}] is reversed")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2

    def contains(self, tau: float) -> bool:
        """Membership of any representative ``tau + 2 pi k``."""
        k = math.floor((self.lo - tau) / TWO_PI)
        return any(self.lo <= tau + TWO_PI * j <= self.hi for j in (k, k + 1, k + 2))


@dataclass(frozen=True)
class QpsConfig:
    """Search parameters; ``Delta`` in ``(0, 1/2)``, ``eps`` and ``delta`` in ``(0, 1)``.

    ``rounds`` is the number of amplification rounds, chosen so that
    ``d^{-rounds} <= delta``.
    """

    Delta: float = 0.25
    eps: float = 0.1
    delta: float = 1e-3

    def __post_init__(self):
        if not 0 < self.Delta < 0.5:
            raise ContractError(f"Delta must lie in (0, 1/2), got {self.Delta}")
        if not 0 < self.eps < 1:
            raise ContractError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 < self.delta < 1:
            raise ContractError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def halvings(self) -> int:
        return math.ceil(math.log2(TWO_PI / (1 - 2 * self.Delta)))

    @property
    def Delta_bar(self) -> float:
        return self.Delta + math.pi / 2 ** (self.halvings + 1)

    @property
    def power(self) -> int:
        d = math.floor(1 / self.Delta_bar)
        if d < 2:
            raise ContractError(f"amplification power {d} < 2; lower Delta")
        return d

    @property
    def rounds(self) -> int:
        return max(1, math.ceil(math.log(1 / self.delta) / math.log(self.power)))

    @property
    def eps_per_measurement(self) -> float:
        return self.eps / (self.halvings * self.rounds)


@dataclass
class QueryCounter:
    """Controlled-``U`` or controlled-``U^dag`` applications, weighted by the power used."""

    controlled_U_applications: int = 0

    def charge(self, n: int) -> None:
        if n < 0:
            raise ContractError("query charges are nonnegative")
        self.controlled_U_applications += int(n)


@dataclass
class QpsResult:
    estimate: float
    counter: QueryCounter
    state: np.ndarray
    midpoints: list[float] = field(default_factory=list)
    intervals: list[PhaseInterval] = field(default_factory=list)

    @property
    def queries(self) -> int:
        return self.counter.controlled_U_applications


@lru_cache(maxsize=64)
def classifier_angles(Delta: float, eps: float) -> AngleSet:
    """Angles whose ancilla ``Z`` expectation approximates ``sgn(sin x)`` to ``eps``.

    Outcome 0 then has probability ``(1 + F)/2 >= 1 - eps/2`` on the positive
    side and outcome 1 likewise on the negative side.
    """
    return angles_for_expectation(square_wave(Delta, eps))


def classifier_circuit(Delta: float, eps: float, U) -> QppCircuit:
    if not 0 < Delta < math.pi / 2:
        raise ContractError(f"Delta must lie in (0, pi/2), got {Delta}")
    if not 0 < eps < 1:
        raise ContractError(f"eps must lie in (0, 1), got {eps}")
    return build(classifier_angles(float(Delta), float(eps)), U)


def _measure(angles: AngleSet, U: np.ndarray, psi: np.ndarray, rng) -> tuple[int, np.ndarray]:
    """Run the classifier on ``|0> x psi``; return the outcome and collapsed system state."""
    d = U.shape[0]
    s = np.zeros((2, d, 1), dtype=complex)
    s[0, :, 0] = psi
    out = stream(angles, U, s).reshape(-1)
    if rng is None:
        p = outcome_probabilities(out, 0)
        bit = int(p[1] > p[0])
        half = out.reshape(2, d)[bit]
        post = half / np.linalg.norm(half)
    else:
        bit, collapsed = sample_measurement(out, 0, rng)
        post = collapsed.reshape(2, d)[bit]
    return bit, post


def _update(iv: PhaseInterval, bit: int, Delta: float) -> PhaseInterval:
    m = iv.mid
    if iv.width > TWO_PI - 2 * Delta:
        return PhaseInterval(m - Delta, iv.hi + Delta) if bit == 0 else PhaseInterval(iv.lo - Delta, m + Delta)
    return PhaseInterval(m - Delta, iv.hi) if bit == 0 else PhaseInterval(iv.lo, m + Delta)


def _interval_search(U, psi, interval, Delta, angles, halvings, rng, counter, trace=None):
    for _ in range(halvings):
        m = interval.mid
        bit, psi = _measure(angles, np.exp(-1j * m) * U, psi, rng)
        counter.charge(angles.layers)
        interval = _update(interval, bit, Delta)
        if trace is not None:
            trace.append(interval)
    return interval, psi


def phase_interval_search(
    U, chi, interval: PhaseInterval, Delta: float, eps: float, Q: int, rng=None, counter: QueryCounter | None = None
) -> tuple[PhaseInterval, np.ndarray]:
    """``Q`` halvings of ``interval``; returns the new interval and the collapsed state.

    With ``rng=None`` each measurement takes its more likely outcome instead of
    sampling, which gives the noiseless limit of the search.
    """
    A = check_unitary(U)
    psi = check_state(chi)
    if psi.size != A.shape[0]:
        raise ContractError(f"state of size {psi.size} does not match U of dimension {A.shape[0]}")
    if Q < 1:
        raise ContractError("Q must be at least 1")
    counter = QueryCounter() if counter is None else counter
    angles = classifier_angles(float(Delta), float(eps))
    rng = None if rng is None else np.random.default_rng(rng)
    return _interval_search(A, psi, interval, Delta, angles, Q, rng, counter)


def wrap_phase(x: float) -> float:
    """Representative in ``(-pi, pi]``."""
    y = math.fmod(x + math.pi, TWO_PI)
    if y <= 0:
        y += TWO_PI
    return y - math.pi


def phase_distance(a: float, b: float) -> float:
    return abs(wrap_phase(a - b))


def quantum_phase_search(U, chi, config: QpsConfig = QpsConfig(), rng=None) -> QpsResult:
    """Estimate an eigenphase of ``U`` from a state supported on its eigenvectors.

    Round ``t`` runs the interval search on ``U_t = (e^{-i zeta_{t-1}} U_{t-1})^d``,
    starting from the previous interval recentred and magnified by ``d``. The
    estimate is ``sum_t zeta_t d^{-t}``, wrapped to ``(-pi, pi]``. A
    superposition input collapses towards one eigenvector along the way.
    """
    A = check_unitary(U)
    psi = check_state(chi)
    if psi.size != A.shape[0]:
        raise ContractError(f"state of size {psi.size} does not match U of dimension {A.shape[0]}")
    rng = None if rng is None else np.random.default_rng(rng)
    Q, T, d = config.halvings, config.rounds, config.power
    angles = classifier_angles(config.Delta, config.eps_per_measurement)
    counter = QueryCounter()
    interval = PhaseInterval(-math.pi, math.pi)
    mids: list[float] = []
    trace: list[PhaseInterval] = []
    Ut = A
    for t in range(T):
        weighted = QueryCounter()
        interval, psi = _interval_search(Ut, psi, interval, config.Delta, angles, Q, rng, weighted, trace)
        counter.charge(weighted.controlled_U_applications * d**t)
        m = interval.mid
        mids.append(m)
        Ut = np.linalg.matrix_power(np.exp(-1j * m) * Ut, d)
        interval = PhaseInterval(d * (interval.lo - m), d * (interval.hi - m))
    est = sum(m * float(d) ** (-t) for t, m in enumerate(mids))
    return QpsResult(wrap_phase(est), counter, psi, mids, trace)


def modular_multiplier(N: int, x: int) -> np.ndarray:
    """Permutation ``|y> -> |x y mod N>`` for ``y < N``, identity on padding states."""
    if N < 2:
        raise ContractError("N must be at least 2")
    if math.gcd(x, N) != 1:
        raise ContractError(f"x = {x} is not coprime to N = {N}")
    dim = 1 << max(1, (N - 1).bit_length())
    perm = np.arange(dim)
    perm[:N] = (x * np.arange(N)) % N
    U = np.zeros((dim, dim), dtype=complex)
    U[perm, np.arange(dim)] = 1.0
    return U


def convergents(frac: float, cap: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents ``(p, q)`` of ``frac`` with ``q <= cap``."""
    out = []
    h0, h1, k0, k1 = 0, 1, 1, 0
    x = frac
    for _ in range(64):
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > cap:
            break
        out.append((h1, k1))
        rem = x - a
        if rem < 1e-12:
            break
        x = 1 / rem
    return out


def _order_candidate(tau: float, N: int, x: int) -> int:
    """Smallest convergent denominator ``r`` of ``tau / 2 pi`` with ``x^r = 1 mod N``, else the last one."""
    frac = (tau / TWO_PI) % 1.0
    best = 1
    for _, q in convergents(frac, N):
        best = q
        if pow(x, q, N) == 1:
            return q
    return best


@dataclass
class PeriodResult:
    order: int
    attempts: int
    queries: int
    success: bool


def period_finding(N: int, x: int, config: QpsConfig = QpsConfig(), rng=None, max_attempts: int = 10) -> PeriodResult:
    """Multiplicative order of ``x`` modulo ``N`` from phase search on ``|1>``.

    Denominators from different attempts are combined by their lcm, which
    recovers the order even when one estimate lands on ``s/r`` with a common factor.
    """
    U = modular_multiplier(N, x)
    rng = np.random.default_rng(rng)
    start = np.zeros(U.shape[0], dtype=complex)
    start[1 % N] = 1.0
    acc, queries = 1, 0
    for attempt in range(1, max_attempts + 1):
        if pow(x, acc, N) == 1:
            return PeriodResult(acc, attempt - 1, queries, True)
        res = quantum_phase_search(U, start, config, rng)
        queries += res.queries
        acc = math.lcm(acc, _order_candidate(res.estimate, N, x))
        if pow(x, acc, N) == 1:
            return PeriodResult(acc, attempt, queries, True)
    return PeriodResult(acc, max_attempts, queries, False)


def grover_operator(A) -> np.ndarray:
    """``A (2|0><0| - I) A^dag ((I - 2|1><1|) x I)``."""
    M = check_unitary(A)
    dim = M.shape[0]
    num_qubits(dim)
    if dim < 2:
        raise ContractError("A must act on at least one qubit")
    R0 = -np.eye(dim, dtype=complex)
    R0[0, 0] = 1.0
    flip = np.ones(dim)
    flip[dim // 2:] = -1.0
    return M @ R0 @ dagger(M) @ np.diag(flip)


@dataclass
class AmplitudeResult:
    estimate: float
    phase: float
    queries: int


def amplitude_estimation(A, config: QpsConfig = QpsConfig(), rng=None) -> AmplitudeResult:
    """``|sin tau|`` for ``A|0> = cos tau |0>|psi> + sin tau |1>|phi>``.

    Phase search on the Grover operator from ``A|0>`` returns ``+-2 tau``.
    """
    M = check_unitary(A)
    G = grover_operator(M)
    res = quantum_phase_search(G, M[:, 0], config, rng)
    return AmplitudeResult(abs(math.sin(res.estimate / 2)), res.estimate, res.queries)
