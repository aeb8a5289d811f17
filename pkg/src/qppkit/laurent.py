"""Laurent polynomials in ``e^{ix/2}`` and their complementary polynomials.

A :class:`LaurentPoly` of degree ``L`` stores coefficients ``c_j`` for
``j = -L..L`` and evaluates to ``sum_j c_j exp(i j x / 2)``. Only indices with
``j = L (mod 2)`` may be nonzero, so the parity is fixed by the degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from . import tolerances
from .errors import ConditioningError, ContractError


@dataclass(frozen=True, eq=False)
class LaurentPoly:
    """Coefficients ``coeffs[j + degree]`` of ``exp(i j x / 2)``."""

    coeffs: np.ndarray
    degree: int

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        L = int(self.degree)
        if L < 0:
            raise ContractError(f"degree must be nonnegative, got {L}")
        if c.size != 2 * L + 1:
            raise ContractError(f"degree {L} needs {2 * L + 1} coefficients, got {c.size}")
        if np.any(c[1::2] != 0):
            raise ContractError("coefficients of the wrong parity are nonzero")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "degree", L)

    # construction

    @classmethod
    def from_terms(cls, terms: dict[int, complex], degree: int | None = None) -> LaurentPoly:
        """Build from ``{j: c_j}``; the degree defaults to the largest ``|j|``."""
        idx = [int(j) for j in terms]
        L = max((abs(j) for j in idx), default=0) if degree is None else int(degree)
        c = np.zeros(2 * L + 1, dtype=complex)
        for j, v in terms.items():
            if abs(j) > L:
                raise ContractError(f"index {j} exceeds degree {L}")
            if (j - L) % 2:
                raise ContractError(f"index {j} has the wrong parity for degree {L}")
            c[j + L] += v
        return cls(c, L)

    @classmethod
    def zero(cls, degree: int = 0) -> LaurentPoly:
        return cls(np.zeros(2 * degree + 1, dtype=complex), degree)

    @classmethod
    def constant(cls, value: complex, degree: int = 0) -> LaurentPoly:
        if degree % 2:
            raise ContractError("a constant needs even degree")
        return cls.from_terms({0: value}, degree)

    @classmethod
    def from_fourier(cls, c: np.ndarray) -> LaurentPoly:
        """Parity-0 polynomial from coefficients of ``exp(i m x)``, ``m = -K..K``."""
        c = np.asarray(c, dtype=complex)
        K = (c.size - 1) // 2
        out = np.zeros(4 * K + 1, dtype=complex)
        out[::2] = c
        return cls(out, 2 * K)

    # structure

    @property
    def parity(self) -> int:
        return self.degree % 2

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.degree, self.degree + 1)

    def coeff(self, j: int) -> complex:
        if abs(j) > self.degree:
            return 0j
        return complex(self.coeffs[j + self.degree])

    def fourier(self) -> np.ndarray:
        """Coefficients of ``exp(i m x)`` for a parity-0 polynomial."""
        if self.parity:
            raise ContractError("only parity-0 polynomials have an integer Fourier series")
        return self.coeffs[::2].copy()

    def with_degree(self, L: int) -> LaurentPoly:
        """Pad with zeros or drop extreme terms to reach degree ``L``."""
        if (L - self.degree) % 2:
            raise ContractError("degree change must preserve parity")
        if L >= self.degree:
            pad = L - self.degree
            return LaurentPoly(np.pad(self.coeffs, pad), L)
        cut = self.degree - L
        return LaurentPoly(self.coeffs[cut:-cut], L)

    def trimmed(self, tol: float = 0.0) -> LaurentPoly:
        """Lower the degree while both extreme coefficients are at most ``tol``."""
        L = self.degree
        c = self.coeffs
        while L >= 2 and abs(c[0]) <= tol and abs(c[-1]) <= tol:
            c = c[2:-2]
            L -= 2
        return LaurentPoly(c, L)

    # arithmetic

    def _aligned(self, other: LaurentPoly) -> tuple[np.ndarray, np.ndarray, int]:
        if self.parity != other.parity:
            raise ContractError("cannot add polynomials of different parity")
        L = max(self.degree, other.degree)
        return self.with_degree(L).coeffs, other.with_degree(L).coeffs, L

    def __add__(self, other):
        if isinstance(other, LaurentPoly):
            a, b, L = self._aligned(other)
            return LaurentPoly(a + b, L)
        return self + LaurentPoly.constant(other)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(-self.coeffs, self.degree)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            return multiply(self, other)
        return LaurentPoly(self.coeffs * complex(other), self.degree)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return LaurentPoly(self.coeffs / complex(scalar), self.degree)

    def conj(self) -> LaurentPoly:
        """The polynomial whose values are the complex conjugates of ours."""
        return LaurentPoly(np.conj(self.coeffs[::-1]), self.degree)

    def shift(self, j: int) -> LaurentPoly:
        """Multiply by ``exp(i j x / 2)``."""
        L = self.degree + abs(j)
        c = np.zeros(2 * L + 1, dtype=complex)
        start = L - self.degree + j
        c[start:start + self.coeffs.size] = self.coeffs
        return LaurentPoly(c, L)

    # evaluation

    def __call__(self, x):
        return evaluate(self, x)

    def is_real(self, tol: float | None = None) -> bool:
        tol = tolerances.TOL.real_symmetry if tol is None else tol
        return bool(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))) <= tol)

    def sup_norm(self) -> float:
        """``max |p(x)|`` over the real line, refined beyond grid resolution."""
        return sup_abs(self)

    def allclose(self, other: LaurentPoly, atol: float = 1e-12) -> bool:
        L = max(self.degree, other.degree)
        if self.parity != other.parity:
            return bool(np.max(np.abs(self.coeffs)) <= atol and np.max(np.abs(other.coeffs)) <= atol)
        return bool(np.max(np.abs(self.with_degree(L).coeffs - other.with_degree(L).coeffs)) <= atol)

    def to_json(self) -> dict:
        return {
            "basis": "laurent-half",
            "degree": self.degree,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> LaurentPoly:
        if data.get("basis", "laurent-half") != "laurent-half":
            raise ContractError(f"unexpected basis {data.get('basis')!r}")
        c = np.array([complex(re, im) for re, im in data["coeffs"]])
        return cls(c, int(data["degree"]))

    def __repr__(self):
        terms = {int(j): complex(c) for j, c in zip(self.indices, self.coeffs) if c != 0}
        return f"LaurentPoly(degree={self.degree}, terms={terms})"


def evaluate(p: LaurentPoly, x):
    """``sum_j c_j exp(i j x / 2)`` for scalar or array ``x``."""
    x = np.asarray(x, dtype=float)
    z = np.exp(0.5j * x)
    # Horner in z on the shifted ordinary polynomial z^L p
    acc = np.zeros_like(z)
    for c in p.coeffs[::-1]:
        acc = acc * z + c
    out = acc * np.exp(-0.5j * p.degree * x)
    return out if out.ndim else complex(out)


def multiply(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Product; the degree and parity add."""
    return LaurentPoly(np.convolve(a.coeffs, b.coeffs), a.degree + b.degree)


def grid(L: int) -> np.ndarray:
    """Verification grid for degree ``L``: ``10(L+1)+1`` points on ``[-pi, pi]``."""
    return np.linspace(-np.pi, np.pi, 10 * (L + 1) + 1)


def sup_abs(p: LaurentPoly, refine: int = 8) -> float:
    """Maximum of ``|p|`` from a dense grid plus local refinement of the peaks."""
    if p.degree == 0:
        return float(abs(p.coeffs[0]))
    n = 32 * (p.degree + 1)
    xs = np.linspace(-2 * np.pi, 2 * np.pi, 2 * n, endpoint=False)
    vals = np.abs(p(xs))
    h = xs[1] - xs[0]
    best = float(vals.max())
    for i in np.argsort(vals)[-refine:]:
        res = minimize_scalar(
            lambda t: -abs(evaluate(p, t)),
            bounds=(xs[i] - h, xs[i] + h),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best


# roots and spectral factorization


def _horner(g: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Value and derivative of the ascending-order polynomial ``g`` at ``z``."""
    val = np.zeros_like(z)
    der = np.zeros_like(z)
    for c in g[::-1]:
        der = der * z + val
        val = val * z + c
    return val, der


def _scaled_residual(g: np.ndarray, r: np.ndarray) -> np.ndarray:
    """``|g(r)| / (||g||_1 max(1,|r|)^n)``, evaluated stably on both sides of the circle."""
    inside = np.abs(r) <= 1
    out = np.empty(r.shape, dtype=float)
    scale = np.sum(np.abs(g))
    if np.any(inside):
        out[inside] = np.abs(_horner(g, r[inside])[0]) / scale
    if np.any(~inside):
        rr = 1 / r[~inside]
        out[~inside] = np.abs(_horner(g[::-1], rr)[0]) / scale
    return out


def _polish(g: np.ndarray, r: np.ndarray, steps: int = 3) -> np.ndarray:
    """Newton refinement that only accepts steps lowering the residual."""
    r = r.copy()
    res = _scaled_residual(g, r)
    for _ in range(steps):
        val, der = _horner(g, r)
        ok = der != 0
        cand = r.copy()
        cand[ok] = r[ok] - val[ok] / der[ok]
        new = _scaled_residual(g, cand)
        better = np.isfinite(new) & (new < res)
        r[better] = cand[better]
        res[better] = new[better]
    return r


def roots(g) -> np.ndarray:
    """All roots of ``sum_k g[k] xi^k`` with multiplicity.

    Companion-matrix eigenvalues (LAPACK balances the matrix), then a few
    guarded Newton steps. Trailing zero coefficients give roots at zero.
    """
    g = np.asarray(g, dtype=complex).reshape(-1)
    if g.size == 0 or not np.any(g != 0):
        raise ContractError("the zero polynomial has no finite root set")
    nz = np.flatnonzero(g)
    lo, hi = nz[0], nz[-1]
    core = g[lo:hi + 1]
    zeros = np.zeros(lo, dtype=complex)
    if core.size == 1:
        return zeros
    if core.size == 2:
        return np.concatenate([zeros, [-core[0] / core[1]]])
    comp = sla.companion(core[::-1])
    r = sla.eigvals(comp, check_finite=False)
    r = _polish(core, r)
    return np.concatenate([zeros, r])


def _pair_roots(r: np.ndarray) -> tuple[np.ndarray, float]:
    """Pick one root from each inverse-conjugate pair.

    Returns the kept roots (modulus at least one) and the worst pairing
    residual ``|r s* - 1| / max(1, |r|^2)``.
    """
    n = r.size
    if n % 2:
        raise ConditioningError(f"odd number of roots ({n}) cannot pair up", residual=1.0)
    m = n // 2
    if m == 0:
        return r, 0.0
    mag = np.abs(r)
    cost = np.abs(r[:, None] * np.conj(r[None, :]) - 1) / np.maximum(1, np.maximum.outer(mag, mag) ** 2)
    # greedy matching by increasing cost; double roots on the circle pair with each other
    iu, ju = np.triu_indices(n, 1)
    used = np.zeros(n, dtype=bool)
    first, second = [], []
    for k in np.argsort(cost[iu, ju], kind="stable"):
        i, j = iu[k], ju[k]
        if used[i] or used[j]:
            continue
        used[i] = used[j] = True
        first.append(i)
        second.append(j)
        if len(first) == m:
            break
    a, b = r[first], r[second]
    worst = float(cost[first, second].max())
    swap = np.abs(a) < np.abs(b)
    o = np.where(swap, b, a)
    s = np.where(swap, a, b)
    mod = np.sqrt(np.abs(o) / np.abs(s))
    ang = np.angle(o / np.abs(o) + s / np.abs(s))
    return mod * np.exp(1j * ang), worst


def _coeffs_from_roots(rts: np.ndarray) -> np.ndarray:
    """Coefficients of ``prod (zeta - r)`` up to a positive scale.

    The product is formed pointwise on the unit circle in log-magnitude form
    and transformed back with an FFT, which avoids the cancellation of
    expanding the product directly.
    """
    n = rts.size
    N = 1 << int(np.ceil(np.log2(n + 1)))
    zeta = np.exp(2j * np.pi * np.arange(N) / N)
    diff = zeta[:, None] - rts[None, :]
    logmag = np.sum(np.log(np.abs(diff)), axis=1)
    phase = np.sum(np.angle(diff), axis=1)
    vals = np.exp(logmag - logmag.max() + 1j * phase)
    return np.fft.fft(vals)[: n + 1] / N


def spectral_factor(a, L: int, zero_tol: float = 1e-14) -> LaurentPoly:
    """Square root of a nonnegative trigonometric polynomial.

    ``a[m + K]`` is the coefficient of ``exp(i m x)`` for ``m = -K..K`` with
    ``K <= L``. Returns ``Q`` of degree ``L`` (parity ``L mod 2``) with
    ``|Q(x)|^2 = A(x)``. In ``zeta = exp(ix)`` the roots of ``zeta^K A`` come in
    pairs ``(r, 1/conj r)``; ``Q`` keeps the root of each pair outside the circle.
    """
    a = np.asarray(a, dtype=complex).reshape(-1)
    K = (a.size - 1) // 2
    if K > L:
        raise ContractError(f"trigonometric degree {K} exceeds requested degree {L}")
    a = (a + np.conj(a[::-1])) / 2
    keep = np.flatnonzero(np.abs(a) > zero_tol)
    if keep.size == 0:
        return LaurentPoly.zero(L)
    Kp = int(max(abs(keep[0] - K), abs(keep[-1] - K)))
    h = a[K - Kp:K + Kp + 1]
    a0 = float(a[K].real)
    if a0 <= 0:
        raise ConditioningError(f"nonnegative polynomial has mean {a0:.3e} <= 0", residual=a0)
    if Kp == 0:
        R = np.array([np.sqrt(a0)], dtype=complex)
    else:
        kept, worst = _pair_roots(roots(h))
        if worst > tolerances.TOL.root_pairing:
            raise ConditioningError(
                f"unpaired root: worst inverse-conjugate pairing residual {worst:.3e}",
                residual=worst,
            )
        R = _coeffs_from_roots(kept)
        R = R * np.sqrt(a0 / np.sum(np.abs(R) ** 2))
    c = np.zeros(2 * L + 1, dtype=complex)
    c[0:2 * R.size:2] = R
    return LaurentPoly(c, L)


def complement(p: LaurentPoly) -> LaurentPoly:
    """``Q`` of the same degree and parity with ``|p|^2 + |Q|^2 = 1``."""
    L = p.degree
    top = sup_abs(p)
    if top > 1 + tolerances.TOL.bound_slack:
        raise ContractError(f"|p| reaches {top:.12f} > 1; rescale before taking the complement")
    A = -multiply(p, p.conj()).coeffs[::2]
    A[L] += 1.0
    return spectral_factor(A, L)


def unit_residual(p: LaurentPoly, q: LaurentPoly, xs=None) -> float:
    """Grid maximum of ``| |p|^2 + |q|^2 - 1 |``."""
    xs = grid(max(p.degree, q.degree)) if xs is None else xs
    return float(np.max(np.abs(np.abs(p(xs)) ** 2 + np.abs(q(xs)) ** 2 - 1)))


def random_poly(L: int, rng, bound: float | None = None) -> LaurentPoly:
    """Random degree-``L`` polynomial; with ``bound`` its sup norm is rescaled to it."""
    rng = np.random.default_rng(rng)
    c = np.zeros(2 * L + 1, dtype=complex)
    n = L + 1
    c[::2] = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    p = LaurentPoly(c, L)
    if bound is not None:
        p = p * (bound / sup_abs(p))
    return p
