"""Global numeric policy.

Every tolerance in the library is read from :data:`TOL`. Replace it with
``dataclasses.replace`` inside :func:`override` to experiment.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    unitary: float = 1e-10
    hermitian: float = 1e-10
    psd: float = 1e-10
    trace: float = 1e-10
    norm: float = 1e-10
    degenerate_norm: float = 1e-12
    # |r s* - 1| <= root_pairing * max(1, |r|^2)
    root_pairing: float = 1e-5
    # |p| may exceed 1 by this much before complement() refuses it
    bound_slack: float = 1e-8
    # scale applied when an approximant touches the unit bound
    safety_scale: float = 1.0 - 1e-8
    # extreme coefficients dropped during angle finding must be below this
    degree_drop: float = 1e-6
    leading_zero: float = 1e-12
    real_symmetry: float = 1e-10
    max_degree: int = 10_000


TOL = Tolerances()


@contextlib.contextmanager
def override(**changes):
    """Temporarily replace fields of the global policy."""
    global TOL
    saved = TOL
    TOL = replace(TOL, **changes)
    try:
        yield TOL
    finally:
        TOL = saved
