"""Finite-difference geometry of parametrized immersions into the unit sphere.

An Immersion maps a parameter box in R^n to the unit sphere of C^(m+1),
stored as R^(2m+2) with coordinates interleaved per complex pair; the complex
structure acts pairwise as (x, y) -> (-y, x).  jet() assembles induced
metric, orthonormal frame, Christoffel symbols, second fundamental form and
mean curvature from central differences (optionally Richardson-extrapolated).
On top sit the contact-condition residual, the cubic form extraction, and
finite-difference residuals of the Codazzi and Gauss structure equations.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import permutations
from typing import Callable

import numpy as np

from .errors import (
    ConsistencyError,
    DegenerateChartError,
    DimensionError,
    LegendrianViolation,
)
from .pinching import PinchReport, pinching_report
from .tensor_core import SymCubic, sym3_from_dense, symmetrize3

TOL_FD = 1e-6
TOL_CODAZZI = 1e-3
TOL_GAUSS = 1e-3
DEFAULT_H = 1e-4
DEFAULT_CODAZZI_H = 1e-3
DEFAULT_SCAN_MARGIN = 0.05

LEGENDRIAN_GATE = 1e-6


@dataclass(frozen=True, eq=False)
class Immersion:
    """Parametrized unit-sphere immersion with chart metadata."""

    name: str
    n: int
    ambient_n: int  # ambient complex dimension minus one; 2*ambient_n+2 real coords
    evaluate: Callable[[np.ndarray], np.ndarray]
    domain_lo: np.ndarray
    domain_hi: np.ndarray
    periodic: np.ndarray
    margin: float = DEFAULT_SCAN_MARGIN

    def point(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise DimensionError(f"parameter point of length {self.n} expected")
        f = np.asarray(self.evaluate(u), dtype=float)
        if f.shape != (2 * self.ambient_n + 2,):
            raise DimensionError(
                f"immersion returned shape {f.shape}, expected ({2*self.ambient_n+2},)"
            )
        r = np.linalg.norm(f)
        if abs(r - 1.0) > 1e-12:
            raise ConsistencyError(f"|F(u)| = {r!r} is off the unit sphere at u = {u}")
        return f

    def sample_points(self, count: int, rng: np.random.Generator,
                      margin: float | None = None) -> np.ndarray:
        """Uniform parameter points; nonperiodic axes stay `margin` away from
        the chart boundary (defaults to the chart's own margin)."""
        m = self.margin if margin is None else margin
        lo = np.where(self.periodic, self.domain_lo, self.domain_lo + m)
        hi = np.where(self.periodic, self.domain_hi, self.domain_hi - m)
        return rng.uniform(lo, hi, size=(count, self.n))

    def grid(self, resolutions) -> np.ndarray:
        """Row-major grid; periodic axes sample the half-open period, the
        others a closed range inside the margins."""
        if np.isscalar(resolutions):
            resolutions = [int(resolutions)] * self.n
        if len(resolutions) != self.n:
            raise DimensionError(f"{self.n} per-axis resolutions expected")
        axes = []
        for i, r in enumerate(resolutions):
            r = int(r)
            if r < 1:
                raise DimensionError("grid resolution must be >= 1")
            lo, hi = self.domain_lo[i], self.domain_hi[i]
            if self.periodic[i]:
                axes.append(lo + (hi - lo) * (np.arange(r) + 0.5) / r)
            else:
                axes.append(np.linspace(lo + self.margin, hi - self.margin, r))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def apply_complex_structure(w: np.ndarray) -> np.ndarray:
    """J acting pairwise on interleaved coordinates: (x, y) -> (-y, x)."""
    out = np.empty_like(w)
    out[..., 0::2] = -w[..., 1::2]
    out[..., 1::2] = w[..., 0::2]
    return out


@dataclass(eq=False)
class ImmersionJet:
    """Pointwise first/second-order data of an immersion."""

    u: np.ndarray
    h: float
    F: np.ndarray
    dF: np.ndarray  # (n, amb) coordinate first partials
    d2F: np.ndarray  # (n, n, amb)
    g: np.ndarray
    g_inv: np.ndarray
    frame: np.ndarray  # (n, amb) orthonormal tangent frame, Gram-Schmidt order
    frame_coeff: np.ndarray  # e_a = sum_i frame_coeff[a, i] dF[i]
    B_coord: np.ndarray  # (n, n, amb), coordinate-index second fundamental form
    B: np.ndarray  # (n, n, amb) in the orthonormal frame
    H: np.ndarray  # mean curvature vector
    gamma: np.ndarray | None = None  # Christoffel symbols, gamma[k, i, j] = G^k_ij


class _Stencil:
    """Memoized evaluations at u + (h/2) * integer offsets."""

    def __init__(self, imm: Immersion, u: np.ndarray, h: float):
        self.imm = imm
        self.u = np.asarray(u, dtype=float)
        self.half = 0.5 * h
        self.cache: dict[tuple, np.ndarray] = {}

    def at(self, offset) -> np.ndarray:
        key = tuple(int(o) for o in offset)
        hit = self.cache.get(key)
        if hit is None:
            v = self.u + self.half * np.asarray(key, dtype=float)
            hit = self.imm.point(v)
            self.cache[key] = hit
        return hit


def _unit_offsets(n, i, scale):
    o = [0] * n
    o[i] = scale
    return tuple(o)


def _pair_offsets(n, i, j, si, sj):
    o = [0] * n
    o[i] = si
    o[j] = sj
    return tuple(o)


def _first_partials(st: _Stencil, n: int, h: float, richardson: bool) -> np.ndarray:
    d_h = np.stack([
        (st.at(_unit_offsets(n, i, 2)) - st.at(_unit_offsets(n, i, -2))) / (2 * h)
        for i in range(n)
    ])
    if not richardson:
        return d_h
    d_half = np.stack([
        (st.at(_unit_offsets(n, i, 1)) - st.at(_unit_offsets(n, i, -1))) / h
        for i in range(n)
    ])
    return (4.0 * d_half - d_h) / 3.0


def _second_partials(st: _Stencil, n: int, h: float, richardson: bool) -> np.ndarray:
    f0 = st.at((0,) * n)
    amb = len(f0)

    def one(step, hh):
        d2 = np.zeros((n, n, amb))
        for i in range(n):
            d2[i, i] = (
                st.at(_unit_offsets(n, i, step)) - 2.0 * f0 + st.at(_unit_offsets(n, i, -step))
            ) / (hh * hh)
        for i in range(n):
            for j in range(i + 1, n):
                val = (
                    st.at(_pair_offsets(n, i, j, step, step))
                    - st.at(_pair_offsets(n, i, j, step, -step))
                    - st.at(_pair_offsets(n, i, j, -step, step))
                    + st.at(_pair_offsets(n, i, j, -step, -step))
                ) / (4.0 * hh * hh)
                d2[i, j] = d2[j, i] = val
        return d2

    d2_h = one(2, h)
    if not richardson:
        return d2_h
    return (4.0 * one(1, 0.5 * h) - d2_h) / 3.0


def _metric_at(imm: Immersion, u: np.ndarray, h: float, richardson: bool) -> np.ndarray:
    st = _Stencil(imm, u, h)
    df = _first_partials(st, imm.n, h, richardson)
    return df @ df.T


def jet(
    imm: Immersion,
    u,
    h: float = DEFAULT_H,
    *,
    richardson: bool = False,
    christoffels: bool = True,
) -> ImmersionJet:
    """Second-order central-difference jet at an interior (or periodic) point.

    B is the second partial minus its tangential projection (g-inverse
    contraction against the first partials) minus the radial part -g_ij F;
    the Christoffel symbols come from central differences of the metric.
    """
    if h <= 0:
        raise DimensionError("step h must be positive")
    u = np.asarray(u, dtype=float)
    n = imm.n
    st = _Stencil(imm, u, h)
    f0 = st.at((0,) * n)
    df = _first_partials(st, n, h, richardson)
    d2f = _second_partials(st, n, h, richardson)

    g = df @ df.T
    evals = np.linalg.eigvalsh(g)
    if evals[0] <= 1e-8 * evals[-1]:
        raise DegenerateChartError(
            f"induced metric is numerically singular at u = {u} (eigs {evals})"
        )
    g_inv = np.linalg.inv(g)

    # rows of L^-1 dF are the Gram-Schmidt frame in index order
    chol = np.linalg.cholesky(g)
    coeff = np.linalg.inv(chol)
    frame = coeff @ df

    proj = np.einsum("ijc,kc,kl,ld->ijd", d2f, df, g_inv, df, optimize=True)
    b_coord = d2f - proj + g[:, :, None] * f0
    b_frame = np.einsum("ai,bj,ijc->abc", coeff, coeff, b_coord, optimize=True)
    mean = np.einsum("ij,ijc->c", g_inv, b_coord) / n

    gamma = None
    if christoffels:
        dg = np.stack([
            (
                _metric_at(imm, u + h * _basis(n, m), h, richardson)
                - _metric_at(imm, u - h * _basis(n, m), h, richardson)
            ) / (2 * h)
            for m in range(n)
        ])  # dg[m, i, j] = del_m g_ij
        # del_i g_jl + del_j g_il - del_l g_ij
        term = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
        gamma = 0.5 * np.einsum("kl,ijl->kij", g_inv, term)

    return ImmersionJet(
        u=u,
        h=h,
        F=f0,
        dF=df,
        d2F=d2f,
        g=g,
        g_inv=g_inv,
        frame=frame,
        frame_coeff=coeff,
        B_coord=b_coord,
        B=b_frame,
        H=mean,
        gamma=gamma,
    )


def _basis(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def norm_sq_b(j: ImmersionJet) -> float:
    """|B|^2 in the orthonormal frame."""
    return float(np.einsum("abc,abc->", j.B, j.B))


def legendrian_residual(j: ImmersionJet) -> float:
    """max over i, j of |<JF, dF_i>| and |<J dF_i, dF_j>|."""
    jf = apply_complex_structure(j.F)
    jdf = apply_complex_structure(j.dF)
    reeb = np.abs(j.dF @ jf)
    contact = np.abs(jdf @ j.dF.T)
    return float(max(np.max(reeb), np.max(contact)))


@dataclass(frozen=True, eq=False)
class SigmaAt:
    sigma: SymCubic
    symmetry_residual: float


def sigma_at(j: ImmersionJet, *, gate: float = LEGENDRIAN_GATE, sym_tol: float = TOL_FD) -> SigmaAt:
    """Cubic form s_abc = <B(e_a, e_b), J e_c>, symmetrized over all slots.

    Requires the jet to pass the Legendrian gate; the returned
    symmetry_residual is the largest deviation of the raw values from their
    symmetrization and is itself bounded by sym_tol.
    """
    res = legendrian_residual(j)
    if res > gate:
        raise LegendrianViolation(
            f"legendrian residual {res:.3e} exceeds gate {gate:.1e}"
        )
    jframe = apply_complex_structure(j.frame)
    raw = np.einsum("abc,dc->abd", j.B, jframe)
    sym = symmetrize3(raw)
    deviation = float(np.max(np.abs(raw - sym)))
    if deviation > sym_tol:
        raise ConsistencyError(
            f"cubic-form symmetry residual {deviation:.3e} exceeds {sym_tol:.1e}"
        )
    return SigmaAt(sigma=sym3_from_dense(sym), symmetry_residual=deviation)


def _sigma_coord(imm: Immersion, u, h, richardson) -> np.ndarray:
    jt = jet(imm, u, h, richardson=richardson, christoffels=False)
    jdf = apply_complex_structure(jt.dF)
    return np.einsum("ijc,kc->ijk", jt.B_coord, jdf)


def symmetrize4(t: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(t)
    for p in permutations(range(4)):
        acc += t.transpose(p)
    return acc / 24.0


def covariant_sigma_derivative(imm: Immersion, u, h: float = DEFAULT_CODAZZI_H,
                               *, richardson: bool = False) -> np.ndarray:
    """T[l,i,j,k] = central difference of the coordinate cubic form along u_l,
    corrected with Christoffel terms at the center."""
    u = np.asarray(u, dtype=float)
    n = imm.n
    center = jet(imm, u, h, richardson=richardson, christoffels=True)
    jdf = apply_complex_structure(center.dF)
    s0 = np.einsum("ijc,kc->ijk", center.B_coord, jdf)
    gamma = center.gamma
    t = np.zeros((n, n, n, n))
    for l in range(n):
        sp = _sigma_coord(imm, u + h * _basis(n, l), h, richardson)
        sm = _sigma_coord(imm, u - h * _basis(n, l), h, richardson)
        ds = (sp - sm) / (2 * h)
        corr = (
            np.einsum("mi,mjk->ijk", gamma[:, l, :], s0)
            + np.einsum("mj,imk->ijk", gamma[:, l, :], s0)
            + np.einsum("mk,ijm->ijk", gamma[:, l, :], s0)
        )
        t[l] = ds - corr
    return t


def codazzi_residual(imm: Immersion, u, h: float = DEFAULT_CODAZZI_H,
                     *, richardson: bool = False) -> float:
    """Largest deviation of the covariant derivative of the cubic form from
    its full symmetrization over all four indices."""
    t = covariant_sigma_derivative(imm, u, h, richardson=richardson)
    return float(np.max(np.abs(t - symmetrize4(t))))


def riemann_fd(imm: Immersion, u, h: float = DEFAULT_CODAZZI_H,
               *, richardson: bool = False) -> np.ndarray:
    """Riem[i,j,k,l] = <R(d_i, d_j) d_l, d_k> from finite differences of the
    Christoffel symbols."""
    u = np.asarray(u, dtype=float)
    n = imm.n
    center = jet(imm, u, h, richardson=richardson, christoffels=True)
    dgamma = np.stack([
        (
            jet(imm, u + h * _basis(n, m), h, richardson=richardson).gamma
            - jet(imm, u - h * _basis(n, m), h, richardson=richardson).gamma
        ) / (2 * h)
        for m in range(n)
    ])  # dgamma[m, k, i, j] = del_m G^k_ij
    gamma = center.gamma
    # R^m_{l i j} = del_i G^m_jl - del_j G^m_il + G^m_ia G^a_jl - G^m_ja G^a_il
    r_up = (
        np.einsum("imjl->ijml", dgamma)
        - np.einsum("jmil->ijml", dgamma)
        + np.einsum("mia,ajl->ijml", gamma, gamma)
        - np.einsum("mja,ail->ijml", gamma, gamma)
    )
    return np.einsum("km,ijml->ijkl", center.g, r_up)


def gauss_rhs(j: ImmersionJet) -> np.ndarray:
    """Constant-curvature term plus the cubic-form quadratic terms."""
    g = j.g
    jdf = apply_complex_structure(j.dF)
    s = np.einsum("ijc,kc->ijk", j.B_coord, jdf)
    su = np.einsum("ika,ab->ikb", s, j.g_inv)
    return (
        np.einsum("ik,jl->ijkl", g, g)
        - np.einsum("il,jk->ijkl", g, g)
        + np.einsum("ika,jla->ijkl", su, s)
        - np.einsum("ila,jka->ijkl", su, s)
    )


def gauss_residual(imm: Immersion, u, h: float = DEFAULT_CODAZZI_H,
                   *, richardson: bool = False) -> float:
    """Max componentwise deviation of the finite-difference curvature from
    the Gauss-equation right-hand side."""
    rm = riemann_fd(imm, u, h, richardson=richardson)
    center = jet(imm, np.asarray(u, dtype=float), h, richardson=richardson, christoffels=False)
    return float(np.max(np.abs(rm - gauss_rhs(center))))


@dataclass(frozen=True, eq=False)
class ScanRecord:
    u: np.ndarray
    ok: bool
    report: PinchReport | None
    legendrian_residual: float | None
    symmetry_residual: float | None
    error: str | None


def _default_workers() -> int:
    env = os.environ.get("LEGPINCH_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def field_scan(
    imm: Immersion,
    grid,
    *,
    h: float = DEFAULT_H,
    richardson: bool = False,
    trace_tol: float = 1e-5,
    theta_opts: dict | None = None,
    workers: int | None = None,
) -> list[ScanRecord]:
    """One PinchReport per grid point in row-major order.

    Point-level failures are recorded in the ScanRecord without aborting the
    scan.  Points may be evaluated concurrently (LEGPINCH_THREADS or the
    workers argument); the output order is always grid order.
    """
    points = imm.grid(grid)
    opts = {"starts": 8, "seed": 0}
    opts.update(theta_opts or {})

    def one(u: np.ndarray) -> ScanRecord:
        try:
            jt = jet(imm, u, h, richardson=richardson, christoffels=False)
            lres = legendrian_residual(jt)
            sa = sigma_at(jt)
            rep = pinching_report(sa.sigma, trace_tol=trace_tol, theta_opts=opts)
            return ScanRecord(
                u=u,
                ok=True,
                report=rep,
                legendrian_residual=lres,
                symmetry_residual=sa.symmetry_residual,
                error=None,
            )
        except Exception as exc:  # recorded per point, scan continues
            return ScanRecord(
                u=u, ok=False, report=None,
                legendrian_residual=None, symmetry_residual=None,
                error=f"{type(exc).__name__}: {exc}",
            )

    nworkers = workers if workers is not None else _default_workers()
    if nworkers > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            return list(pool.map(one, points))
    return [one(u) for u in points]
