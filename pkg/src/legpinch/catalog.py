"""Closed-form reference immersions and their expected invariants.

calabi_torus(n) is the product-of-circle-and-sphere minimal contact
immersion whose cubic form has the one-parameter closed form
s_111 = (n-1)/sqrt(n), s_1jj = -1/sqrt(n); totally_geodesic(n) is the real
slice great sphere; control_non_legendrian() is a flat torus with
misaligned phases that fails the contact condition by a fixed margin.
Sphere factors use nested polar charts with the last angle periodic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .immersion import DEFAULT_SCAN_MARGIN, Immersion
from .tensor_core import SymCubic, sym3_from_entries


@dataclass(frozen=True, eq=False)
class Expected:
    norm_sq: float | None
    theta: float | None
    mu: np.ndarray | None
    minimal: bool | None
    legendrian: bool


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    immersion: Immersion
    closed_form_sigma: SymCubic | None
    expected: Expected


def sphere_chart(angles: np.ndarray) -> np.ndarray:
    """Nested polar coordinates on S^m from m angles (last one periodic)."""
    m = len(angles)
    out = np.empty(m + 1)
    sin_prod = 1.0
    for i in range(m):
        out[i] = sin_prod * math.cos(angles[i])
        sin_prod *= math.sin(angles[i])
    out[m] = sin_prod
    return out


def _interleave(z: np.ndarray) -> np.ndarray:
    """Complex vector -> interleaved real coordinates (Re, Im per entry)."""
    out = np.empty(2 * len(z))
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def calabi_torus(n: int) -> CatalogEntry:
    """Minimal contact product immersion of a circle with a round sphere.

    The circle factor is gamma(t) = (sqrt(n/(n+1)) e^{i t/sqrt(n)},
    sqrt(1/(n+1)) e^{-i sqrt(n) t}), period 2 pi sqrt(n); the first component
    scales a unit S^{n-1} in nested polar coordinates.
    """
    if n < 2:
        raise DimensionError(f"calabi torus needs n >= 2, got {n}")
    r1 = math.sqrt(n / (n + 1))
    r2 = math.sqrt(1.0 / (n + 1))
    a = 1.0 / math.sqrt(n)
    b = math.sqrt(n)

    def evaluate(u: np.ndarray) -> np.ndarray:
        t = u[0]
        phi = sphere_chart(u[1:]) if n > 2 else np.array([math.cos(u[1]), math.sin(u[1])])
        z = np.empty(n + 1, dtype=complex)
        z[:n] = r1 * np.exp(1j * a * t) * phi
        z[n] = r2 * np.exp(-1j * b * t)
        return _interleave(z)

    period_t = 2.0 * math.pi * math.sqrt(n)
    lo = [0.0] + [0.0] * (n - 1)
    hi = [period_t] + [math.pi] * max(0, n - 2) + ([2.0 * math.pi] if n >= 2 else [])
    periodic = [True] + [False] * max(0, n - 2) + [True]

    imm = Immersion(
        name=f"calabi{n}",
        n=n,
        ambient_n=n,
        evaluate=evaluate,
        domain_lo=np.array(lo),
        domain_hi=np.array(hi),
        periodic=np.array(periodic, dtype=bool),
        margin=DEFAULT_SCAN_MARGIN,
    )

    sig = sym3_from_entries(
        n,
        {(1, 1, 1): (n - 1) / math.sqrt(n), **{(1, j, j): -1 / math.sqrt(n) for j in range(2, n + 1)}},
    )
    mu = np.array([(n - 1) / math.sqrt(n)] + [-1 / math.sqrt(n)] * (n - 1))
    return CatalogEntry(
        name=f"calabi{n}",
        immersion=imm,
        closed_form_sigma=sig,
        expected=Expected(
            norm_sq=(n - 1) * (n + 2) / n,
            theta=(n - 1) / math.sqrt(n),
            mu=mu,
            minimal=True,
            legendrian=True,
        ),
    )


def totally_geodesic(n: int) -> CatalogEntry:
    """Real-slice great sphere S^n inside the unit sphere of C^(n+1)."""
    if n < 1:
        raise DimensionError(f"totally geodesic sphere needs n >= 1, got {n}")

    def evaluate(u: np.ndarray) -> np.ndarray:
        x = sphere_chart(u) if n > 1 else np.array([math.cos(u[0]), math.sin(u[0])])
        return _interleave(x.astype(complex))

    lo = [0.0] * n
    hi = [math.pi] * max(0, n - 1) + [2.0 * math.pi]
    periodic = [False] * max(0, n - 1) + [True]

    imm = Immersion(
        name=f"geodesic{n}",
        n=n,
        ambient_n=n,
        evaluate=evaluate,
        domain_lo=np.array(lo),
        domain_hi=np.array(hi),
        periodic=np.array(periodic, dtype=bool),
        margin=DEFAULT_SCAN_MARGIN,
    )
    return CatalogEntry(
        name=f"geodesic{n}",
        immersion=imm,
        closed_form_sigma=sym3_from_entries(n, {}) if n >= 2 else None,
        expected=Expected(
            norm_sq=0.0,
            theta=0.0,
            mu=np.zeros(n),
            minimal=True,
            legendrian=True,
        ),
    )


def control_non_legendrian() -> CatalogEntry:
    """Flat torus in the 5-sphere with phases chosen to break the contact
    condition (the phase sum does not cancel); its residual is 2/3 at every
    point.  Minimality is deliberately not asserted."""
    r = 1.0 / math.sqrt(3.0)

    def evaluate(u: np.ndarray) -> np.ndarray:
        z = np.array(
            [r * np.exp(1j * u[0]), r * np.exp(1j * u[1]), r * np.exp(1j * (u[0] + u[1]))]
        )
        return _interleave(z)

    imm = Immersion(
        name="control",
        n=2,
        ambient_n=2,
        evaluate=evaluate,
        domain_lo=np.zeros(2),
        domain_hi=np.full(2, 2.0 * math.pi),
        periodic=np.array([True, True]),
        margin=DEFAULT_SCAN_MARGIN,
    )
    return CatalogEntry(
        name="control",
        immersion=imm,
        closed_form_sigma=None,
        expected=Expected(norm_sq=None, theta=None, mu=None, minimal=None, legendrian=False),
    )


def names() -> list[str]:
    return [f"calabi{n}" for n in range(2, 9)] + [f"geodesic{n}" for n in range(1, 9)] + ["control"]


def get(name: str) -> CatalogEntry:
    """Catalog lookup: calabi<N> (N>=2), geodesic<N> (N>=1), control."""
    if name == "control":
        return control_non_legendrian()
    m = re.fullmatch(r"(calabi|geodesic)(\d+)", name)
    if m is None:
        raise KeyError(f"unknown catalog entry {name!r}; known: calabi<N>, geodesic<N>, control")
    n = int(m.group(2))
    return calabi_torus(n) if m.group(1) == "calabi" else totally_geodesic(n)
