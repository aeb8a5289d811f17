import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import Chebyshev, Polynomial

import oracles
from qppkit.approx import compose_cosine
from qppkit.blockenc import density_block_encoding, purified_oracle
from qppkit.entropy import (
    EntropyRequest,
    PurifiedState,
    TraceCircuit,
    estimate,
    newton_girard,
    power_traces,
    relative_entropy,
    renyi,
    renyi_plan,
    trace_rho_f_sigma,
    von_neumann,
)
from qppkit.errors import ConditioningError, ContractError, ResourceError
from qppkit.linalg import outcome_probabilities, random_density
from qppkit.qsp import angles_for_expectation

EPS = 1e-2
PLUS = np.full((2, 2), 0.5)


def encoded(sigma):
    return density_block_encoding(purified_oracle(sigma))


def test_request_validation():
    with pytest.raises(ContractError):
        EntropyRequest("von_neumann")
    with pytest.raises(ContractError):
        EntropyRequest("renyi", alpha=1.0, gamma=0.1)
    with pytest.raises(ContractError):
        EntropyRequest("renyi", alpha=0.5)
    with pytest.raises(ContractError):
        EntropyRequest("nope", gamma=0.1)
    with pytest.raises(ContractError):
        EntropyRequest(gamma=0.1, shots="many")
    with pytest.raises(ContractError):
        EntropyRequest(gamma=0.1, sampler="amplitude", shots=100)
    assert EntropyRequest("renyi", alpha=2.0).exact


def test_rank_threshold_formula():
    req = EntropyRequest(kappa=3, eps=0.05)
    assert math.isclose(req.threshold(), 0.05 / (16 * 3 * math.log(3 / 0.05)))


def test_rank_mode_hits_degree_cap():
    # the rank-derived floor is tiny, so the log approximant exceeds the degree cap
    with pytest.raises(ResourceError):
        von_neumann(np.eye(2) / 2, EntropyRequest(kappa=3, eps=0.05))


def test_trace_linear_examples():
    f = Polynomial([0, 1])
    assert abs(trace_rho_f_sigma(np.eye(2) / 2, encoded(np.eye(2) / 2), f) - 0.5) <= 1e-6
    assert abs(trace_rho_f_sigma(PLUS, encoded(PLUS), f) - 1.0) <= 1e-6


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(0, 20), st.sampled_from([2, 4]))
def test_trace_matches_dense_algebra(seed, deg, d):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(d, rng), random_density(d, rng)
    f = Chebyshev(rng.standard_normal(deg + 1))
    f = f * (0.99 / max(1e-12, np.max(np.abs(f(np.linspace(-1, 1, 4001))))))
    w, V = np.linalg.eigh(sigma)
    ref = float(np.real(np.trace(rho @ (V * f(w)) @ V.conj().T)))
    assert abs(trace_rho_f_sigma(rho, encoded(sigma), f) - ref) <= 1e-6


def test_trace_square(rng):
    rho, sigma = random_density(4, rng), random_density(4, rng)
    ref = float(np.real(np.trace(rho @ sigma @ sigma)))
    assert abs(trace_rho_f_sigma(rho, encoded(sigma), Polynomial([0, 0, 1])) - ref) <= 1e-6


def test_trace_rejects_unbounded():
    with pytest.raises(ContractError):
        trace_rho_f_sigma(np.eye(2) / 2, encoded(np.eye(2) / 2), Polynomial([0, 2]))


def test_single_ancilla_readout(rng):
    rho, sigma = random_density(2, rng), random_density(2, rng)
    angles = angles_for_expectation(compose_cosine(Polynomial([0, 1])))
    circ = TraceCircuit(angles, encoded(sigma), PurifiedState(purified_oracle(rho)))
    assert circ.measured_qubits == (0,)
    psi = circ.final_state().reshape(-1)
    p = outcome_probabilities(psi, 0)
    assert math.isclose(p[0] - p[1], circ.expectation(), abs_tol=1e-12)
    # the dense circuit prepares the same state from all zeros
    assert np.allclose(circ.unitary()[:, 0], psi, atol=1e-12)
    assert circ.num_qubits == int(math.log2(psi.size))


def test_von_neumann_closed_forms():
    req = EntropyRequest(gamma=0.1, eps=EPS)
    assert abs(von_neumann(np.eye(2) / 2, req).estimate - math.log(2)) <= EPS
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        pure = von_neumann(PLUS, req)
    assert abs(pure.estimate) <= EPS


@pytest.mark.parametrize("n", [1, 2, 3])
def test_von_neumann_maximally_mixed(n):
    d = 2**n
    req = EntropyRequest(gamma=1 / d, eps=EPS)
    assert abs(von_neumann(np.eye(d) / d, req).estimate - n * math.log(2)) <= EPS


def test_von_neumann_rank_three(rng):
    rho = random_density(4, rng, rank=3, min_eig=0.05)
    res = von_neumann(rho, EntropyRequest(gamma=0.05, eps=EPS))
    assert abs(res.estimate - oracles.von_neumann(rho)) <= EPS
    assert res.warnings == []


def test_von_neumann_floor_warning():
    rho = np.diag([0.98, 0.02])
    with pytest.warns(RuntimeWarning):
        res = von_neumann(rho, EntropyRequest(gamma=0.1, eps=EPS))
    assert res.warnings


def test_von_neumann_accepts_oracle(rng):
    rho = random_density(2, rng, min_eig=0.1)
    req = EntropyRequest(gamma=0.1, eps=EPS)
    a = von_neumann(rho, req).estimate
    b = von_neumann(PurifiedState(purified_oracle(rho)), req).estimate
    assert math.isclose(a, b, abs_tol=1e-12)


def test_relative_entropy_examples(rng):
    req = EntropyRequest("relative", gamma=0.1, eps=EPS)
    rho = random_density(2, rng, min_eig=0.1)
    assert abs(relative_entropy(rho, rho, req).estimate) <= EPS
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2, req)
    assert abs(res.estimate - math.log(2)) <= EPS


def test_relative_entropy_random_pair(rng):
    rho, sigma = random_density(4, rng, min_eig=0.05), random_density(4, rng, min_eig=0.05)
    res = relative_entropy(rho, sigma, EntropyRequest("relative", gamma=0.05, eps=EPS))
    assert abs(res.estimate - oracles.relative_entropy(rho, sigma)) <= EPS


def test_relative_entropy_support_violation():
    res = relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0]), EntropyRequest("relative", gamma=0.1))
    assert res.estimate == math.inf and res.warnings


def test_renyi_closed_forms():
    res = renyi(np.diag([0.75, 0.25]), 2.0, EntropyRequest("renyi", alpha=2.0))
    assert abs(res.estimate - 0.4700036292457356) <= 1e-10
    assert abs(res.estimate + math.log(0.625)) <= 1e-10
    assert abs(renyi(PLUS, 2.0, EntropyRequest("renyi", alpha=2.0)).estimate) <= 1e-10
    half = renyi(np.eye(2) / 2, 0.5, EntropyRequest("renyi", alpha=0.5, gamma=0.1, eps=EPS))
    assert abs(half.estimate - math.log(2)) <= EPS


@pytest.mark.parametrize("alpha", [0.5, 2.0, 2.5, 3.0])
def test_renyi_random_states(alpha, rng):
    rho = random_density(4, rng, min_eig=0.05)
    res = estimate(EntropyRequest("renyi", alpha=alpha, gamma=0.05, eps=EPS), rho)
    assert abs(res.estimate - oracles.renyi(rho, alpha)) <= EPS


def test_renyi_integer_and_fractional_paths_agree(rng):
    rho = random_density(2, rng, min_eig=0.2)
    exact = renyi(rho, 2.0, EntropyRequest("renyi", alpha=2.0)).estimate
    alpha = 2.0 + 1e-9
    frac = renyi(rho, alpha, EntropyRequest("renyi", alpha=alpha, gamma=0.2, eps=EPS))
    assert not renyi_plan(2.0, None, EPS).approximate and renyi_plan(alpha, 0.2, EPS).approximate
    assert abs(frac.estimate - exact) <= EPS


def test_renyi_plan_factors():
    plan = renyi_plan(0.5, 0.1, EPS)
    assert math.isclose(plan.factor, 2 * 0.1**-0.5)
    plan = renyi_plan(2.5, 0.1, EPS)
    assert math.isclose(plan.factor, 2 * math.log(2 * math.e / 0.1))
    assert plan.f.degree() >= 1


def test_sampled_mode_reports_shots(rng):
    rho = random_density(2, rng, min_eig=0.2)
    res = estimate(EntropyRequest("renyi", alpha=2.0, shots=1000, seed=4), rho)
    assert res.shots_used == 1000 and res.half_width > 0
    again = estimate(EntropyRequest("renyi", alpha=2.0, shots=1000, seed=4), rho)
    assert again.estimate == res.estimate


def test_auto_shots_meet_half_width(rng):
    rho = random_density(2, rng, min_eig=0.2)
    res = estimate(EntropyRequest("renyi", alpha=2.0, eps=0.05, shots="auto", seed=2), rho)
    assert res.half_width <= 0.05
    exact = estimate(EntropyRequest("renyi", alpha=2.0), rho).estimate
    assert abs(res.estimate - exact) <= 0.05


def test_amplitude_sampler(rng):
    rho = random_density(2, rng, min_eig=0.2)
    exact = estimate(EntropyRequest(gamma=0.2, eps=0.05), rho).estimate
    res = estimate(EntropyRequest(gamma=0.2, eps=0.05, shots="auto", seed=3, sampler="amplitude"), rho)
    assert abs(res.estimate - exact) <= 0.05 and res.shots_used == 0


def test_newton_girard_examples():
    p = np.array([0.7, 0.2, 0.1])
    sums = [1.0, 0.54, 0.352]
    assert np.allclose([np.sum(p**k) for k in (1, 2, 3)], sums)
    assert np.max(np.abs(newton_girard(sums) - p)) <= 1e-9
    assert np.allclose(newton_girard([1, 1, 1]), [1, 0, 0], atol=1e-6)


def _roots_oracle(sums):
    e1 = sums[0]
    e2 = (e1 * sums[0] - sums[1]) / 2
    e3 = (e2 * sums[0] - e1 * sums[1] + sums[2]) / 3
    return np.sort(np.roots([1, -e1, e2, -e3]).real)[::-1]


@pytest.mark.parametrize("s2,s3", [(-1, -1), (-1, 1), (1, -1), (1, 1)])
def test_newton_girard_noisy(s2, s3):
    p = np.array([0.7, 0.2, 0.1])
    sums = np.array([np.sum(p**k) for k in (1, 2, 3)]) + np.array([0, s2, s3]) * 1e-3
    got = newton_girard(sums)
    assert np.max(np.abs(got - _roots_oracle(sums))) <= 1e-9
    # the inversion amplifies trace noise by up to about 17 at this spectrum
    assert np.max(np.abs(got - p)) <= 2e-2


def test_newton_girard_rejects_inconsistent():
    with pytest.raises(ContractError):
        newton_girard([0.5, 0.2])
    with pytest.raises(ConditioningError):
        newton_girard([1.0, 0.2, 0.9])


def test_power_traces_feed_newton_girard():
    rho = np.diag([0.7, 0.2, 0.1, 0.0])
    sums = power_traces(rho, 3)
    assert np.allclose(sums, [1, 0.54, 0.352], atol=1e-8)
    assert np.allclose(newton_girard(sums), [0.7, 0.2, 0.1], atol=1e-6)
