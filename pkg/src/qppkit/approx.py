"""Polynomial approximants used by the applications.

Trigonometric targets (square wave, ``exp(-i t cos x)``) come back as
:class:`LaurentPoly`. Targets on ``[-1, 1]`` (logarithm and powers) come back
as ``numpy.polynomial.Chebyshev`` series and are lifted to phases with
:func:`compose_cosine`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import minimize_scalar
from scipy.special import erf, erfcinv

from . import tolerances
from .errors import ContractError, ResourceError
from .laurent import LaurentPoly, sup_abs

RealPoly = Chebyshev | Polynomial


def _cap(degree: int, what: str) -> None:
    if degree > tolerances.TOL.max_degree:
        raise ResourceError(f"{what} needs degree {degree} > cap {tolerances.TOL.max_degree}")


def _safety(value: float) -> float:
    """Factor bringing a sup norm of ``value`` strictly below one."""
    s = tolerances.TOL.safety_scale
    return min(1.0, s / value) if value > 0 else 1.0


# square wave


def _erf_sign(Delta: float, eps: float):
    k = erfcinv(eps / 2) / math.sin(Delta)
    return k, lambda y: erf(k * y)


def chebyshev_of_sin(a: np.ndarray) -> LaurentPoly:
    """``sum_j a_j T_j(sin x)`` as a Laurent polynomial.

    Uses ``T_j(sin x) = ((-i)^j e^{ijx} + i^j e^{-ijx}) / 2``.
    """
    a = np.asarray(a, dtype=float)
    n = a.size - 1
    f = np.zeros(2 * n + 1, dtype=complex)
    for j, aj in enumerate(a):
        if aj == 0:
            continue
        if j == 0:
            f[n] += aj
        else:
            f[n + j] += aj * (-1j) ** j / 2
            f[n - j] += aj * (1j) ** j / 2
    return LaurentPoly.from_fourier(f)


def _valid_region(Delta: float, n: int = 2001) -> np.ndarray:
    right = np.linspace(Delta, np.pi - Delta, n)
    return np.concatenate([-right[::-1], right])


def square_wave(Delta: float, eps: float) -> LaurentPoly:
    """Bounded trigonometric polynomial within ``eps`` of ``sgn(sin x)`` away from
    ``Delta``-neighbourhoods of ``0`` and ``+-pi``.

    A smoothed sign ``erf(k y)`` is interpolated at Chebyshev nodes with odd
    degree grown until the grid error passes, then composed with ``y = sin x``.
    The trigonometric degree is padded to a multiple of four.
    """
    if not 0 < Delta < math.pi / 2:
        raise ContractError(f"Delta must lie in (0, pi/2), got {Delta}")
    if not 0 < eps < 1:
        raise ContractError(f"eps must lie in (0, 1), got {eps}")
    k, g = _erf_sign(Delta, eps)
    xs = _valid_region(Delta)
    target = np.sign(np.sin(xs))
    n = 2 * int(math.ceil(k)) + 1
    while True:
        _cap(n, "square wave")
        a = cheb.chebinterpolate(g, n)
        a[0::2] = 0.0
        F = chebyshev_of_sin(a)
        F = F * _safety(sup_abs(F))
        if np.max(np.abs(F(xs) - target)) <= eps:
            break
        n += 2 * max(1, n // 10)
    K = F.degree // 2
    return F.with_degree(2 * (K + (-K) % 4))


def square_wave_error(F: LaurentPoly, Delta: float) -> float:
    xs = _valid_region(Delta)
    return float(np.max(np.abs(F(xs) - np.sign(np.sin(xs)))))


# Jacobi-Anger


def bessel_j(nmax: int, x: float) -> np.ndarray:
    """``J_0(x) .. J_nmax(x)`` by Miller's downward recurrence.

    Normalized with ``J_0 + 2 sum_k J_{2k} = 1``.
    """
    out = np.zeros(nmax + 1)
    if x == 0:
        out[0] = 1.0
        return out
    ax = abs(x)
    start = nmax + int(math.sqrt(40 * max(nmax, ax))) + int(ax) + 20
    start += start % 2
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    for m in range(start, 0, -1):
        j_prev = 2 * m / ax * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_next *= 1e-250
            j_cur *= 1e-250
            out *= 1e-250
            norm *= 1e-250
        if m - 1 <= nmax:
            out[m - 1] = j_cur
        if (m - 1) % 2 == 0 and m - 1 > 0:
            norm += 2 * j_cur
    # m - 1 == 0 leaves J_0 unnormalized in j_cur
    norm += j_cur
    out /= norm
    if x < 0:
        out[1::2] *= -1
    return out


def jacobi_anger_order(t: float, delta: float) -> float:
    """``|t| + log(2/delta^2) / log(e + log(2/delta^2) / |t|)``."""
    lg = math.log(2 / delta**2)
    if t == 0:
        return 0.0
    return abs(t) + lg / math.log(math.e + lg / abs(t))


def jacobi_anger_truncation(t: float, N: int) -> LaurentPoly:
    """``sum_{|k| <= N} i^k J_k(-t) e^{ikx}``."""
    J = bessel_j(N, -t)
    k = np.arange(N + 1)
    c = (1j) ** k * J
    return LaurentPoly.from_fourier(np.concatenate([c[:0:-1], c]))


def jacobi_anger(t: float, delta: float) -> LaurentPoly:
    """Trigonometric polynomial within ``delta^2/2`` of ``exp(-i t cos x)``.

    The order starts at :func:`jacobi_anger_order` and grows one step at a time.
    """
    if not 0 < delta < 1:
        raise ContractError(f"delta must lie in (0, 1), got {delta}")
    if t == 0:
        return LaurentPoly.constant(1.0)
    xs = np.linspace(-np.pi, np.pi, 4001)
    exact = np.exp(-1j * t * np.cos(xs))
    N = max(1, int(math.floor(jacobi_anger_order(t, delta))))
    while True:
        _cap(2 * N, "Jacobi-Anger series")
        F = jacobi_anger_truncation(t, N)
        F = F * _safety(sup_abs(F))
        if np.max(np.abs(F(xs) - exact)) <= delta**2 / 2:
            return F
        N += 1


# functions on [-1, 1]


def _cheb_sup(p: Chebyshev) -> float:
    """Sup norm on ``[-1, 1]`` from a dense grid with local refinement."""
    n = max(2001, 16 * (p.degree() + 1))
    xs = np.cos(np.linspace(0, np.pi, n))
    v = np.abs(p(xs))
    best = float(v.max())
    for i in np.argsort(v)[-6:]:
        lo, hi = xs[min(i + 1, n - 1)], xs[max(i - 1, 0)]
        if hi > lo:
            r = minimize_scalar(lambda t: -abs(p(t)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
            best = max(best, -float(r.fun))
    return best


def _series_log(K: int) -> np.ndarray:
    b = np.zeros(K + 1)
    b[1:] = -1.0 / np.arange(1, K + 1)
    return b


def _series_power(K: int, s: float) -> np.ndarray:
    """Coefficients of ``x^s`` in ``u = 1 - x``."""
    b = np.ones(K + 1)
    for k in range(1, K + 1):
        b[k] = b[k - 1] * (k - 1 - s) / k
    return b


def _taylor_degree(series, gamma: float, budget: float, scale: float) -> int:
    """Smallest ``K`` whose tail at ``x = gamma`` is at most ``budget``."""
    u = 1 - gamma
    K = 4
    while True:
        _cap(K, "Taylor truncation")
        b = series(2 * K + 200)
        tail = abs(scale) * np.sum(np.abs(b[K + 1:]) * u ** np.arange(K + 1, b.size))
        if tail <= budget:
            return K
        K = int(K * 1.25) + 1


@dataclass(frozen=True)
class WindowedTaylor:
    """Truncated Taylor series around ``x = 1`` times a smooth rectangle.

    ``h(x) = scale * sum_k b_k (1-x)^k * (1 + erf(k_w (x - center))) / 2``
    """

    b: np.ndarray = field(repr=False)
    scale: float
    center: float
    steepness: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        w = (1 + erf(self.steepness * (x - self.center))) / 2
        out = np.zeros_like(x)
        live = w > 1e-200
        u = 1 - x[live]
        acc = np.zeros_like(u)
        with np.errstate(over="ignore", invalid="ignore"):
            for c in self.b[::-1]:
                acc = acc * u + c
            out[live] = self.scale * acc * w[live]
        return out


def _windowed_taylor(series, scale: float, gamma: float, eps: float) -> WindowedTaylor:
    K = _taylor_degree(series, gamma, eps / 4, scale)
    b = series(K)
    probe = np.linspace(-1, 1, 40001)
    chosen = None
    for frac in (-0.5, -0.375, -0.25, -0.125, 0.0, 0.25, 0.5):
        c = frac * gamma
        steep = erfcinv(eps / (4 * max(abs(scale) * np.sum(np.abs(b)), 1.0))) / (gamma - c)
        h = WindowedTaylor(b, scale, c, steep)
        vals = h(probe)
        if np.all(np.isfinite(vals)) and np.max(np.abs(vals)) <= 0.9:
            chosen = h
            break
    if chosen is None:
        raise ContractError("no window keeps the Taylor approximant bounded; reduce gamma or eps")
    return chosen


def _fit_chebyshev(h, target, gamma: float, eps: float) -> Chebyshev:
    """Chebyshev interpolant of ``h`` of the smallest passing degree.

    The degree doubles until the grid test passes, then bisection shrinks it.
    """
    good = np.linspace(gamma, 1, 2001)
    want = target(good)

    def attempt(n):
        p = Chebyshev(cheb.chebinterpolate(h, n))
        p = p * _safety(_cheb_sup(p))
        ok = np.max(np.abs(p(good) - want)) <= eps
        return ok, p

    n = 8
    ok, p = attempt(n)
    while not ok:
        n *= 2
        _cap(n, "Chebyshev fit")
        ok, p = attempt(n)
    lo, hi, best = n // 2, n, p
    while hi - lo > 1:
        mid = (lo + hi) // 2
        ok, p = attempt(mid)
        if ok:
            hi, best = mid, p
        else:
            lo = mid
    return best


def _check_gamma_eps(gamma: float, eps: float, gmax: float) -> None:
    if not 0 < gamma <= gmax:
        raise ContractError(f"gamma must lie in (0, {gmax}], got {gamma}")
    if not 0 < eps < 1:
        raise ContractError(f"eps must lie in (0, 1), got {eps}")


def log_poly(gamma: float, eps: float) -> Chebyshev:
    """``|P(x) - ln(x) / (2 ln gamma)| <= eps`` on ``[gamma, 1]``, ``|P| <= 1`` on ``[-1, 1]``."""
    _check_gamma_eps(gamma, eps, 0.5)
    scale = 1 / (2 * math.log(gamma))
    h = _windowed_taylor(_series_log, scale, gamma, eps)
    return _fit_chebyshev(h, lambda x: np.log(x) * scale, gamma, eps)


def power_poly(c: float, gamma: float, eps: float) -> Chebyshev:
    """``|P(x) - (gamma^c / 2) x^{-c}| <= eps`` on ``[gamma, 1]``, ``|P| <= 1`` on ``[-1, 1]``."""
    if not 0 <= c < 1:
        raise ContractError(f"c must lie in [0, 1), got {c}")
    _check_gamma_eps(gamma, eps, 0.5)
    if c == 0:
        return Chebyshev([0.5])
    scale = gamma**c / 2
    h = _windowed_taylor(lambda K: _series_power(K, -c), scale, gamma, eps)
    return _fit_chebyshev(h, lambda x: scale * x ** (-c), gamma, eps)


def monomial_shift_poly(alpha_frac: float, gamma: float, eps: float) -> Chebyshev:
    """``|P(x) - x^a / (2 ln(2e/gamma))| <= eps`` on ``[gamma, 1]`` for ``a`` in ``(0, 1)``."""
    if not 0 < alpha_frac < 1:
        raise ContractError(f"fractional exponent must lie in (0, 1), got {alpha_frac}")
    _check_gamma_eps(gamma, eps, 0.5)
    scale = 1 / (2 * math.log(2 * math.e / gamma))
    h = _windowed_taylor(lambda K: _series_power(K, alpha_frac), scale, gamma, eps)
    return _fit_chebyshev(h, lambda x: scale * x**alpha_frac, gamma, eps)


def compose_cosine(p: RealPoly) -> LaurentPoly:
    """``F(x) = p(cos x)`` as a parity-0 Laurent polynomial.

    Chebyshev series use ``T_k(cos x) = cos(kx)``; monomial series expand
    ``cos^k x`` with binomial coefficients.
    """
    if isinstance(p, Chebyshev):
        a = np.asarray(p.convert(domain=[-1, 1], window=[-1, 1]).coef, dtype=float)
        n = a.size - 1
        f = np.zeros(2 * n + 1, dtype=complex)
        f[n] = a[0]
        f[n + 1:] += a[1:] / 2
        f[:n][::-1] += a[1:] / 2
        return LaurentPoly.from_fourier(f)
    if isinstance(p, Polynomial):
        a = np.asarray(p.convert(domain=[-1, 1], window=[-1, 1]).coef, dtype=float)
    else:
        a = np.asarray(p, dtype=float)
    n = a.size - 1
    f = np.zeros(2 * n + 1, dtype=complex)
    for k, ak in enumerate(a):
        if ak == 0:
            continue
        j = np.arange(k + 1)
        w = np.array([math.comb(k, int(i)) for i in j], dtype=float) * 0.5**k
        np.add.at(f, n + 2 * j - k, ak * w)
    return LaurentPoly.from_fourier(f)


def real_poly_to_json(p: RealPoly) -> dict:
    basis = "chebyshev" if isinstance(p, Chebyshev) else "monomial"
    return {"basis": basis, "coeffs": [float(c) for c in p.coef]}


def real_poly_from_json(data: dict) -> RealPoly:
    kind = data.get("basis", "monomial")
    if kind == "chebyshev":
        return Chebyshev(data["coeffs"])
    if kind == "monomial":
        return Polynomial(data["coeffs"])
    raise ContractError(f"unknown polynomial basis {kind!r}")


def real_sup(p: RealPoly) -> float:
    """Sup norm on ``[-1, 1]`` of a Chebyshev or monomial series."""
    return _cheb_sup(p.convert(kind=Chebyshev, domain=[-1, 1], window=[-1, 1]))


@dataclass(frozen=True)
class ApproxSpec:
    """What to approximate and how well.

    ``target`` is one of ``square_wave``, ``exp_cos``, ``log_scaled``,
    ``power`` and ``monomial_shift``.
    """

    target: str
    eps: float
    Delta: float | None = None
    t: float | None = None
    gamma: float | None = None
    c: float | None = None
    alpha_frac: float | None = None

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ContractError(f"eps must lie in (0, 1), got {self.eps}")
        if self.Delta is not None and not 0 < self.Delta < math.pi:
            raise ContractError(f"Delta must lie in (0, pi), got {self.Delta}")
        if self.gamma is not None and not 0 < self.gamma < 1:
            raise ContractError(f"gamma must lie in (0, 1), got {self.gamma}")

    def build(self):
        if self.target == "square_wave":
            return square_wave(self._need("Delta"), self.eps)
        if self.target == "exp_cos":
            return jacobi_anger(self._need("t"), self.eps)
        if self.target == "log_scaled":
            return log_poly(self._need("gamma"), self.eps)
        if self.target == "power":
            return power_poly(self._need("c"), self._need("gamma"), self.eps)
        if self.target == "monomial_shift":
            return monomial_shift_poly(self._need("alpha_frac"), self._need("gamma"), self.eps)
        raise ContractError(f"unknown approximation target {self.target!r}")

    def _need(self, name: str):
        v = getattr(self, name)
        if v is None:
            raise ContractError(f"target {self.target!r} requires {name}")
        return v
