"""Seven-dimensional cross product and the almost complex structure on S^6.

The cross product comes from the imaginary part of octonion multiplication.
Orientation convention (declared, one of several in the literature):

    e1 x e2 = e3,   e1 x e4 = e5,   e2 x e4 = e6,   e3 x e4 = e7,

with the remaining three Fano lines oriented as the Cayley-Dickson doubling
of the quaternions forces them:

    e1 x e7 = e6,   e2 x e5 = e7,   e3 x e6 = e5.

All exported checks are identities that hold for any valid orientation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionError, DomainError

# oriented Fano lines, 0-based
_TRIPLES = ((0, 1, 2), (0, 3, 4), (0, 6, 5), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 5, 4))


def _build_table() -> np.ndarray:
    c = np.zeros((7, 7, 7))
    for a, b, d in _TRIPLES:
        for i, j, k in ((a, b, d), (b, d, a), (d, a, b)):
            c[i, j, k] = 1.0
            c[j, i, k] = -1.0
    c.flags.writeable = False
    return c


#: structure constants c_ijk with e_i x e_j = sum_k c_ijk e_k; totally antisymmetric
OCTONION_TABLE: np.ndarray = _build_table()


def cross(x, y) -> np.ndarray:
    """Bilinear cross product on R^7 per the declared table."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (7,) or y.shape != (7,):
        raise DimensionError("cross product is defined on R^7")
    return np.einsum("ijk,i,j->k", OCTONION_TABLE, x, y)


def almost_complex(p, v) -> np.ndarray:
    """J at p on the round 6-sphere: v -> p x v for tangent v."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if p.shape != (7,) or v.shape != (7,):
        raise DimensionError("points and tangents live in R^7")
    if abs(np.linalg.norm(p) - 1.0) > 1e-10:
        raise DomainError("base point must lie on the unit sphere")
    if abs(float(p @ v)) > 1e-10 * max(1.0, float(np.linalg.norm(v))):
        raise DomainError("vector must be tangent to the sphere at p")
    return cross(p, v)


@dataclass(frozen=True)
class AppendixConstants:
    """Integral-inequality threshold and the constants of its equality case."""

    berger_norm_sq: Fraction = Fraction(25, 8)
    berger_theta_sq: Fraction = Fraction(5, 4)
    ambient_simons_constant: Fraction = Fraction(15, 4)

    @staticmethod
    def threshold(theta_sq):
        """75/56 + (10/7) theta^2; exact on Fraction input, float otherwise."""
        return Fraction(75, 56) + Fraction(10, 7) * theta_sq

    @property
    def berger(self) -> dict:
        return {"norm_sq": self.berger_norm_sq, "theta_sq": self.berger_theta_sq}


def appendix_constants() -> AppendixConstants:
    return AppendixConstants()
