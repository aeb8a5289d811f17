import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import Chebyshev, Polynomial
from scipy.special import jv

from qppkit.approx import (
    ApproxSpec,
    bessel_j,
    compose_cosine,
    jacobi_anger,
    jacobi_anger_order,
    jacobi_anger_truncation,
    log_poly,
    monomial_shift_poly,
    power_poly,
    real_poly_from_json,
    real_poly_to_json,
    real_sup,
    square_wave,
    square_wave_error,
)
from qppkit.errors import ContractError, ResourceError
from qppkit.laurent import sup_abs
from qppkit.tolerances import override

DENSE = np.linspace(-np.pi, np.pi, 20001)


def on_interval(gamma, n=2001):
    return np.linspace(gamma, 1, n)


def test_square_wave_half_width():
    F = square_wave(0.5, 0.1)
    assert F.parity == 0
    assert square_wave_error(F, 0.5) <= 0.1
    assert np.max(np.abs(F(DENSE))) <= 1
    assert abs(F(0.0)) <= 1


def test_square_wave_degree_against_heuristic():
    F = square_wave(0.1, 1e-3)
    K = F.degree // 2
    assert square_wave_error(F, 0.1) <= 1e-3
    assert K <= 3 * (1 / 0.1) * math.log(1 / 1e-3)
    assert K % 4 == 0


def test_square_wave_degree_grows_linearly_in_inverse_width():
    widths = [0.4, 0.2, 0.1, 0.05]
    degrees = [square_wave(w, 1e-2).degree // 2 for w in widths]
    slope = np.polyfit(np.log(1 / np.array(widths)), np.log(degrees), 1)[0]
    assert slope <= 1.15


def test_square_wave_resource_cap():
    with override(max_degree=50):
        with pytest.raises(ResourceError):
            square_wave(0.05, 1e-6)


def test_square_wave_rejects_bad_width():
    with pytest.raises(ContractError):
        square_wave(2.0, 0.1)


def test_bessel_against_scipy():
    for x in (-3.0, -1.0, 0.5, 7.0):
        assert np.allclose(bessel_j(20, x), jv(np.arange(21), x), atol=1e-14)


def test_bessel_zeroth_at_one():
    assert abs(bessel_j(0, 1.0)[0] - 0.7651976866) <= 1e-10


def test_jacobi_anger_trivial_and_coefficient():
    assert jacobi_anger(0.0, 1e-3).allclose(jacobi_anger(0.0, 0.5))
    assert np.allclose(jacobi_anger(0.0, 1e-3)(DENSE[::100]), 1)
    assert abs(jacobi_anger_truncation(1.0, 10).coeff(0) - jv(0, -1.0)) <= 1e-14
    # the bounded series is rescaled slightly, within its delta^2 / 2 budget
    assert abs(jacobi_anger(1.0, 1e-3).coeff(0) - jv(0, -1.0)) <= 5e-7


def test_jacobi_anger_accuracy():
    F = jacobi_anger(1.0, 1e-3)
    assert np.max(np.abs(F(DENSE) - np.exp(-1j * np.cos(DENSE)))) <= 5e-7
    assert sup_abs(F) <= 1


def test_jacobi_anger_error_monotone_in_order():
    errs = [np.max(np.abs(jacobi_anger_truncation(2.0, N)(DENSE) - np.exp(-2j * np.cos(DENSE)))) for N in range(1, 15)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_jacobi_anger_order_expression():
    lg = math.log(2e6)
    assert math.isclose(jacobi_anger_order(2.0, 1e-3), 2 + lg / math.log(math.e + lg / 2))
    assert jacobi_anger_order(0.0, 1e-3) == 0


def test_log_poly_bounds():
    P = log_poly(0.25, 1e-3)
    xs = on_interval(0.25)
    assert np.max(np.abs(P(xs) - np.log(xs) / (2 * math.log(0.25)))) <= 1e-3
    assert abs(P(1.0)) <= 1e-3
    assert real_sup(P) <= 1


def test_power_poly_bounds():
    P = power_poly(0.5, 0.25, 1e-3)
    xs = on_interval(0.25)
    assert np.max(np.abs(P(xs) - 0.25**0.5 / 2 * xs**-0.5)) <= 1e-3
    assert real_sup(P) <= 1


def test_power_poly_zero_exponent_is_half():
    P = power_poly(0.0, 0.25, 1e-3)
    assert np.allclose(P(on_interval(0.25)), 0.5)


def test_monomial_shift_bounds():
    P = monomial_shift_poly(0.5, 0.1, 1e-3)
    xs = on_interval(0.1)
    assert np.max(np.abs(P(xs) - xs**0.5 / (2 * math.log(2 * math.e / 0.1)))) <= 1e-3
    assert real_sup(P) <= 1


@given(st.floats(0.05, 0.5), st.floats(1e-4, 0.1))
def test_log_poly_property(gamma, eps):
    P = log_poly(gamma, eps)
    xs = on_interval(gamma)
    assert np.max(np.abs(P(xs) - np.log(xs) / (2 * math.log(gamma)))) <= eps
    assert real_sup(P) <= 1


def test_compose_cosine_examples():
    F = compose_cosine(Polynomial([0, 1]))
    assert np.allclose(F.fourier(), [0.5, 0, 0.5])
    F = compose_cosine(Polynomial([0, 0, 1]))
    assert np.allclose(F.fourier(), [0.25, 0, 0.5, 0, 0.25])


@given(st.integers(0, 2**32 - 1))
def test_compose_cosine_random(seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(13)
    xs = DENSE[::40]
    for p in (Polynomial(c), Chebyshev(c)):
        assert np.max(np.abs(compose_cosine(p)(xs) - p(np.cos(xs)))) <= 1e-10


def test_spec_dispatch_and_json():
    spec = ApproxSpec("log_scaled", 1e-2, gamma=0.2)
    P = spec.build()
    back = real_poly_from_json(real_poly_to_json(P))
    assert np.allclose(back.coef, P.coef)
    with pytest.raises(ContractError):
        ApproxSpec("square_wave", 1e-2).build()
    with pytest.raises(ContractError):
        ApproxSpec("nope", 1e-2).build()
    with pytest.raises(ContractError):
        ApproxSpec("log_scaled", 2.0, gamma=0.2)
