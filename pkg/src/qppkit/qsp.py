"""Single-qubit trigonometric signal processing.

The circuit with ``L`` signal layers is

    W(x) = Rz(omega) Ry(theta_0) Rz(phi_0) prod_{l=1..L} Rz(x) Ry(theta_l) Rz(phi_l)

and realizes ``[[P, -Q], [conj Q, conj P]]`` for Laurent polynomials ``P, Q``
of degree ``L`` in ``e^{ix/2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances
from .errors import ConditioningError, ContractError
from .laurent import LaurentPoly, complement, grid, spectral_factor, sup_abs


def rz(a: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * a), 0], [0, np.exp(0.5j * a)]])


def ry(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True, eq=False)
class AngleSet:
    """``omega`` plus ``theta_l, phi_l`` for ``l = 0..L``."""

    omega: float
    thetas: np.ndarray
    phis: np.ndarray

    def __post_init__(self):
        th = np.array(self.thetas, dtype=float).reshape(-1)
        ph = np.array(self.phis, dtype=float).reshape(-1)
        if th.size != ph.size or th.size == 0:
            raise ContractError(f"thetas ({th.size}) and phis ({ph.size}) must share a nonzero length")
        th.setflags(write=False)
        ph.setflags(write=False)
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "phis", ph)

    @property
    def layers(self) -> int:
        return self.thetas.size - 1

    def head(self) -> np.ndarray:
        """``Rz(omega) Ry(theta_0) Rz(phi_0)``."""
        return rz(self.omega) @ ry(self.thetas[0]) @ rz(self.phis[0])

    def layer(self, l: int) -> np.ndarray:
        """``Ry(theta_l) Rz(phi_l)`` for ``l >= 1``."""
        return ry(self.thetas[l]) @ rz(self.phis[l])

    def to_json(self) -> dict:
        return {"omega": self.omega, "thetas": self.thetas.tolist(), "phis": self.phis.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> AngleSet:
        return cls(data["omega"], data["thetas"], data["phis"])

    @classmethod
    def random(cls, L: int, rng) -> AngleSet:
        rng = np.random.default_rng(rng)
        return cls(
            rng.uniform(-np.pi, np.pi),
            rng.uniform(0, np.pi, L + 1),
            rng.uniform(-np.pi, np.pi, L + 1),
        )


def qsp_unitary(a: AngleSet, x):
    """``W(x)``; an array ``x`` gives a stack of ``2x2`` matrices."""
    xs = np.asarray(x, dtype=float)
    flat = xs.reshape(-1)
    M = np.broadcast_to(a.head(), (flat.size, 2, 2)).copy()
    left, right = np.exp(-0.5j * flat), np.exp(0.5j * flat)
    for l in range(1, a.layers + 1):
        M[:, :, 0] *= left[:, None]
        M[:, :, 1] *= right[:, None]
        M = M @ a.layer(l)
    return M.reshape(xs.shape + (2, 2))


def angles_to_polys(a: AngleSet) -> tuple[LaurentPoly, LaurentPoly]:
    """The exact pair ``(P, Q)`` realized by an angle set.

    Propagates the first column of ``W`` as two Laurent polynomials.
    """
    v0 = LaurentPoly.constant(1.0)
    v1 = LaurentPoly.zero()
    for l in range(a.layers, 0, -1):
        g = a.layer(l)
        w0 = v0 * g[0, 0] + v1 * g[0, 1]
        w1 = v0 * g[1, 0] + v1 * g[1, 1]
        v0, v1 = w0.shift(-1), w1.shift(1)
    g = a.head()
    P = v0 * g[0, 0] + v1 * g[0, 1]
    Qc = v0 * g[1, 0] + v1 * g[1, 1]
    return P, Qc.conj()


def target_matrix(P: LaurentPoly, Q: LaurentPoly, x) -> np.ndarray:
    p, q = P(x), Q(x)
    return np.stack([np.stack([p, -q], -1), np.stack([np.conj(q), np.conj(p)], -1)], -2)


def round_trip_error(a: AngleSet, P: LaurentPoly, Q: LaurentPoly, xs=None) -> float:
    """Grid maximum of the entrywise error between ``W(x)`` and the target."""
    xs = grid(max(P.degree, Q.degree, a.layers)) if xs is None else xs
    return float(np.max(np.abs(qsp_unitary(a, xs) - target_matrix(P, Q, xs))))


def _unit_pair(v0: complex, v1: complex) -> tuple[float, float, complex, complex]:
    """``(theta, phi, a, b)`` with ``(a, b) = (cos(theta/2) e^{i phi/2}, sin(theta/2) e^{-i phi/2})``
    on the ray of ``(v0, v1)``."""
    m0, m1 = abs(v0), abs(v1)
    scale = max(m0, m1)
    if m1 <= 1e-15 * scale:
        return 0.0, 0.0, 1.0 + 0j, 0j
    if m0 <= 1e-15 * scale:
        return math.pi, 0.0, 0j, 1.0 + 0j
    theta = 2 * math.atan2(m1, m0)
    phi = float(np.angle(v0) - np.angle(v1))
    a = math.cos(theta / 2) * np.exp(0.5j * phi)
    b = math.sin(theta / 2) * np.exp(-0.5j * phi)
    return theta, phi, a, b


def find_angles(P: LaurentPoly, Q: LaurentPoly) -> AngleSet:
    """Angles whose circuit realizes ``[[P, -Q], [conj Q, conj P]]``.

    Strips one layer per step: the pair ``(a, b)`` is chosen to annihilate the
    top coefficient of ``aP + bQ`` and the bottom coefficient of
    ``conj(a) Q - conj(b) P``. The two conditions agree because the extreme
    coefficient of ``|P|^2 + |Q|^2`` vanishes; the better conditioned one is used.
    """
    pol = tolerances.TOL
    if P.parity != Q.parity:
        raise ContractError("P and Q must share a parity")
    L = max(P.degree, Q.degree)
    p = P.with_degree(L).coeffs.copy()
    q = Q.with_degree(L).coeffs.copy()
    xs = grid(L)
    res = float(np.max(np.abs(np.abs(P(xs)) ** 2 + np.abs(Q(xs)) ** 2 - 1)))
    if res > 1e-7:
        raise ContractError(f"|P|^2 + |Q|^2 deviates from 1 by {res:.3e} on the grid")

    thetas = np.zeros(L + 1)
    phis = np.zeros(L + 1)
    for k in range(L, 0, -1):
        top, bot = math.hypot(abs(p[-1]), abs(q[-1])), math.hypot(abs(p[0]), abs(q[0]))
        if max(top, bot) < pol.leading_zero:
            theta, phi, a, b = 0.0, 0.0, 1.0 + 0j, 0j
        elif top >= bot:
            theta, phi, a, b = _unit_pair(q[-1], -p[-1])
        else:
            theta, phi, a, b = _unit_pair(np.conj(p[0]), np.conj(q[0]))
        up = a * p + b * q
        down = np.conj(a) * q - np.conj(b) * p
        dropped = max(abs(up[-1]), abs(down[0]))
        if dropped > pol.degree_drop:
            raise ConditioningError(
                f"degree did not drop at layer {k}: residual coefficient {dropped:.3e}",
                step=k,
                residual=dropped,
            )
        # e^{ix/2}(aP + bQ) keeps indices -k..k-2, e^{-ix/2}(a* Q - b* P) keeps -k+2..k
        p, q = up[:-2], down[2:]
        thetas[k], phis[k] = theta, phi
    p0, q0 = complex(p[0]), complex(q[0])
    thetas[0] = 2 * math.atan2(abs(q0), abs(p0))
    if abs(q0) < pol.leading_zero:
        phis[0], omega = 0.0, -2 * float(np.angle(p0))
    elif abs(p0) < pol.leading_zero:
        phis[0], omega = 0.0, -2 * float(np.angle(q0))
    else:
        phis[0] = float(np.angle(q0) - np.angle(p0))
        omega = -float(np.angle(p0) + np.angle(q0))
    return AngleSet(omega, thetas, phis)


def _check_bound(F: LaurentPoly) -> None:
    top = sup_abs(F)
    if top > 1 + tolerances.TOL.bound_slack:
        raise ContractError(f"|F| reaches {top:.12f} > 1; rescale before angle finding")


def angles_for_projection(F: LaurentPoly) -> AngleSet:
    """Angles with ``<0|W(x)|0> = F(x)`` for a trigonometric polynomial ``F``.

    ``F`` of degree ``K`` in ``e^{ix}`` gives ``2K`` layers.
    """
    if F.parity:
        raise ContractError("F must have parity 0")
    _check_bound(F)
    return find_angles(F, complement(F))


def expectation_polys(F: LaurentPoly) -> tuple[LaurentPoly, LaurentPoly]:
    """``(P, Q)`` of degree ``K`` with ``|P|^2 = (1+F)/2`` and ``|Q|^2 = (1-F)/2``."""
    if F.parity:
        raise ContractError("F must have parity 0")
    if not F.is_real():
        raise ContractError("F must be real valued: coefficients violate c_{-j} = conj(c_j)")
    _check_bound(F)
    f = F.fourier()
    K = (f.size - 1) // 2
    half = f / 2
    plus, minus = half.copy(), -half
    plus[K] += 0.5
    minus[K] += 0.5
    return spectral_factor(plus, K), spectral_factor(minus, K)


def angles_for_expectation(F: LaurentPoly) -> AngleSet:
    """Angles with ``<0|W^dag Z W|0> = F(x)`` for real ``F``; ``K`` layers."""
    P, Q = expectation_polys(F)
    return find_angles(P, Q)


def z_expectation(a: AngleSet, x) -> np.ndarray:
    W = qsp_unitary(a, x)
    return np.abs(W[..., 0, 0]) ** 2 - np.abs(W[..., 1, 0]) ** 2
