"""Maximum of the cubic form on the unit sphere and the adapted spectrum.

theta() runs a shifted symmetric power iteration over many starts, polishes
the best candidates with a Newton solve of the first-order system
s(x,x,.) = lam*x, |x| = 1, and assembles the adapted basis by
eigendecomposition of the slice s(e1,.,.) restricted to the orthogonal
complement of the maximizer.  theta_bruteforce() is the independent grid
oracle used to cross-check the optimizer.  canonical3() reduces a traceless
3-dimensional tensor to its four-parameter normal form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

from .errors import ConvergenceError, DimensionError
from .tensor_core import SymCubic, sym3_from_dense, _require_traceless

TOL_LAGRANGE = 1e-8
TOL_CANON = 1e-8

DEFAULT_STARTS = 32
DEFAULT_MAX_ITER = 500

# default per-axis resolutions giving ~1e6 grid directions
_BRUTE_RESOLUTION = {2: 1 << 20, 3: 1024, 4: 102}
_MULTIPLICITY_POINTS = 1 << 18


@dataclass(frozen=True, eq=False)
class AdaptedSpectrum:
    """Maximizing direction, its slice spectrum and diagnostics.

    mu[0] equals theta; basis rows are the adapted orthonormal frame with
    e1 first.  multiplicity_one is None unless the grid check was run.
    """

    theta: float
    e1: np.ndarray
    mu: np.ndarray
    basis: np.ndarray
    lagrange_residual: float
    multiplicity_one: bool | None = None


@dataclass(frozen=True, eq=False)
class Canonical3:
    """Four-parameter normal form of a traceless cubic tensor on R^3."""

    lambda1: float
    lambda2: float
    mu1: float
    mu2: float
    x: float
    y: float
    z: float
    rotation: np.ndarray

    @property
    def theta(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def norm_sq(self) -> float:
        return 2.5 * self.x + 1.5 * self.y + self.z

    @property
    def gram(self) -> float:
        x, y, z = self.x, self.y, self.z
        return (
            2.75 * x * x + 0.75 * y * y + 0.5 * z * z
            + 4.5 * x * y + x * z + 1.5 * y * z
        )


def cubic_form(s: SymCubic, x: np.ndarray) -> float:
    """s(X,X,X); odd under X -> -X."""
    x = np.asarray(x, dtype=float)
    if x.shape != (s.n,):
        raise DimensionError(f"vector of length {s.n} expected, got shape {x.shape}")
    return float(np.einsum("ijk,i,j,k->", s.dense, x, x, x))


def cubic_form_many(s: SymCubic, xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != s.n:
        raise DimensionError(f"(m, {s.n}) array expected, got shape {xs.shape}")
    return np.einsum("ijk,si,sj,sk->s", s.dense, xs, xs, xs)


def conjugate(s: SymCubic, q: np.ndarray) -> SymCubic:
    """Tensor in the rotated basis whose rows are the new basis vectors."""
    q = np.asarray(q, dtype=float)
    if q.shape != (s.n, s.n):
        raise DimensionError(f"({s.n},{s.n}) matrix expected")
    rotated = np.einsum("ai,bj,ck,ijk->abc", q, q, q, s.dense, optimize=True)
    return sym3_from_dense(rotated, symmetrize=True)


@lru_cache(maxsize=6)
def sphere_grid(n: int, points: int) -> np.ndarray:
    """Deterministic quasi-uniform directions on S^{n-1}, n <= 4.

    Grids are cached; the returned array is read-only.
    """
    grid = _sphere_grid_build(n, points)
    grid.flags.writeable = False
    return grid


def _sphere_grid_build(n: int, points: int) -> np.ndarray:
    if n == 2:
        t = 2.0 * np.pi * (np.arange(points) + 0.5) / points
        return np.column_stack([np.cos(t), np.sin(t)])
    if n == 3:
        i = np.arange(points)
        z = 1.0 - (2.0 * i + 1.0) / points
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        phi = np.pi * (3.0 - np.sqrt(5.0)) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    if n == 4:
        u = qmc.Halton(d=3, scramble=False).random(points)
        a, b = 2.0 * np.pi * u[:, 1], 2.0 * np.pi * u[:, 2]
        r1 = np.sqrt(1.0 - u[:, 0])
        r2 = np.sqrt(u[:, 0])
        return np.column_stack(
            [r1 * np.sin(a), r1 * np.cos(a), r2 * np.sin(b), r2 * np.cos(b)]
        )
    raise DimensionError(f"sphere grids are provided for n <= 4, got n = {n}")


def _slice_matrix(dense: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("ijk,i->jk", dense, x)


def _power_stage(dense, starts_x, alpha0, max_iter):
    """Batched shifted power iteration; returns per-start (value, direction)."""
    x = starts_x / np.linalg.norm(starts_x, axis=1, keepdims=True)
    f = np.einsum("ijk,si,sj,sk->s", dense, x, x, x)
    alpha = np.full(len(x), alpha0)
    for _ in range(max_iter):
        y = np.einsum("ijk,sj,sk->si", dense, x, x) + alpha[:, None] * x
        norms = np.linalg.norm(y, axis=1)
        ok = norms > 0
        xn = np.where(ok[:, None], y / np.where(ok, norms, 1.0)[:, None], x)
        fn = np.einsum("ijk,si,sj,sk->s", dense, xn, xn, xn)
        worse = fn < f - 1e-15 * np.maximum(1.0, np.abs(f))
        # shift heuristic failed for these starts: back off and enlarge it
        alpha[worse] *= 2.0
        keep = ~worse
        moved = np.abs(fn - f) > 1e-14 * np.maximum(1.0, np.abs(fn))
        x[keep] = xn[keep]
        f[keep] = fn[keep]
        if not np.any(moved & keep):
            break
    return f, x


def _newton_polish(dense, x, tol, max_iter=80):
    """Newton on s(x,x,.) = lam*x with |x| = 1; returns (x, residual)."""
    n = len(x)
    x = x / np.linalg.norm(x)
    lam = float(np.einsum("ijk,i,j,k->", dense, x, x, x))
    best_x, best_res = x, np.inf
    for _ in range(max_iter):
        a = _slice_matrix(dense, x)
        grad = a @ x
        res = float(np.max(np.abs(grad - lam * x)))
        if res < best_res:
            best_x, best_res = x, res
        if res <= tol * 1e-3:
            break
        jac = np.zeros((n + 1, n + 1))
        jac[:n, :n] = 2.0 * a - lam * np.eye(n)
        jac[:n, n] = -x
        jac[n, :n] = x
        rhs = np.concatenate([lam * x - grad, [0.5 * (1.0 - x @ x)]])
        try:
            step = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, rhs, rcond=None)[0]
        x = x + step[:n]
        nx = np.linalg.norm(x)
        if nx == 0:
            break
        x = x / nx
        lam = float(np.einsum("ijk,i,j,k->", dense, x, x, x))
    return best_x, best_res


def _orthogonal_complement(e1: np.ndarray) -> np.ndarray:
    """Columns form an orthonormal basis of e1-perp (Householder completion)."""
    n = len(e1)
    c = int(np.argmax(np.abs(e1)))
    v = e1.copy()
    v[c] += math.copysign(1.0, e1[c])
    v /= np.linalg.norm(v)
    h = np.eye(n) - 2.0 * np.outer(v, v)
    return np.delete(h, c, axis=1)


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    for v in vec:
        if abs(v) > 1e-12:
            return vec if v > 0 else -vec
    return vec


def _adapted_from_maximizer(s: SymCubic, e1: np.ndarray, residual: float,
                            multiplicity: bool | None) -> AdaptedSpectrum:
    dense = s.dense
    theta_val = float(np.einsum("ijk,i,j,k->", dense, e1, e1, e1))
    a = _slice_matrix(dense, e1)
    p = _orthogonal_complement(e1)
    evals, evecs = np.linalg.eigh(p.T @ a @ p)
    order = np.argsort(evals, kind="stable")[::-1]
    evals = evals[order]
    frame = (p @ evecs[:, order]).T
    frame = np.array([_fix_sign(v) for v in frame])
    basis = np.vstack([e1, frame])
    mu = np.concatenate([[theta_val], evals])
    return AdaptedSpectrum(
        theta=theta_val,
        e1=e1,
        mu=mu,
        basis=basis,
        lagrange_residual=residual,
        multiplicity_one=multiplicity,
    )


def theta(
    s: SymCubic,
    *,
    starts: int = DEFAULT_STARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = TOL_LAGRANGE,
    seed: int = 0,
    oracle: bool = False,
    check_multiplicity: bool = False,
    multiplicity_tol: float = 0.05,
) -> AdaptedSpectrum:
    """Maximum of s(X,X,X) over the unit sphere with its adapted spectrum.

    Multi-start shifted power iteration (shift n*max|s_ijk|) with the top
    eigenvector of every slice added as warm starts; the best candidates are
    Newton-polished to the Lagrange tolerance.  Start reduction is by value
    with ties broken by start index, so runs are reproducible.

    With oracle=True the result is cross-checked against theta_bruteforce
    (n <= 4) at relative tolerance 1e-4.
    """
    n = s.n
    dense = s.dense
    max_entry = float(np.max(np.abs(dense)))
    if max_entry == 0.0:
        e1 = np.zeros(n)
        e1[0] = 1.0
        return AdaptedSpectrum(
            theta=0.0,
            e1=e1,
            mu=np.zeros(n),
            basis=np.eye(n),
            lagrange_residual=0.0,
            multiplicity_one=False if check_multiplicity else None,
        )

    rng = np.random.default_rng(seed)
    warm = []
    for i in range(n):
        evals, evecs = np.linalg.eigh(dense[i])
        warm.append(evecs[:, -1])
    # coarse value probe: global maxima can have small power-iteration basins
    if n <= 4:
        probe = sphere_grid(n, 4096)
    else:
        probe = rng.standard_normal((4096, n))
        probe /= np.linalg.norm(probe, axis=1, keepdims=True)
    vals = np.einsum("ijk,si,sj,sk->s", dense, probe, probe, probe)
    warm.extend(probe[np.argsort(-vals, kind="stable")[:8]])
    starts_x = np.vstack([rng.standard_normal((starts, n)), np.array(warm)])

    alpha0 = n * max_entry
    f, xs = _power_stage(dense, starts_x, alpha0, max_iter)

    order = np.argsort(-f, kind="stable")
    best_x, best_res, best_f = None, np.inf, -np.inf
    for idx in order[: min(6, len(order))]:
        x, res = _newton_polish(dense, xs[idx], tol)
        fx = float(np.einsum("ijk,i,j,k->", dense, x, x, x))
        if fx < 0.0:
            x, fx = -x, -fx
        if best_x is None or fx > best_f + 1e-14 * max(1.0, abs(best_f)):
            best_x, best_res, best_f = x, res, fx
    if best_x is None or best_res > tol:
        raise ConvergenceError(
            f"theta optimizer residual {best_res:.3e} exceeds tolerance {tol:.1e}",
            best={"theta": best_f, "e1": best_x, "residual": best_res},
        )

    spectrum = _adapted_from_maximizer(s, best_x, best_res, None)

    if oracle:
        if n > 4:
            raise DimensionError("oracle cross-check requires n <= 4")
        ref = theta_bruteforce(s)
        if abs(spectrum.theta - ref) > 1e-4 * max(abs(ref), abs(spectrum.theta), 1e-300):
            raise ConvergenceError(
                f"theta {spectrum.theta:.12g} disagrees with grid oracle {ref:.12g}",
                best=spectrum,
            )

    if check_multiplicity:
        flag = multiplicity_one(s, multiplicity_tol, spectrum=spectrum)
        spectrum = AdaptedSpectrum(
            theta=spectrum.theta,
            e1=spectrum.e1,
            mu=spectrum.mu,
            basis=spectrum.basis,
            lagrange_residual=spectrum.lagrange_residual,
            multiplicity_one=flag,
        )
    return spectrum


def theta_bruteforce(s: SymCubic, resolution: int | None = None) -> float:
    """Grid oracle: max of the cubic form over >= resolution^(n-1) directions.

    The top grid candidates get up to 50 projected-gradient polish steps.
    Every reported value is an actual evaluation, so the result is a lower
    bound on the true maximum.
    """
    n = s.n
    if n > 4:
        raise DimensionError("theta_bruteforce supports n <= 4")
    res = resolution if resolution is not None else _BRUTE_RESOLUTION[n]
    points = res ** (n - 1)
    grid = sphere_grid(n, points)
    vals = cubic_form_many(s, grid)

    top = np.argsort(-vals, kind="stable")[: min(256, len(vals))]
    x = grid[top].copy()
    f = vals[top].copy()
    dense = s.dense
    max_entry = float(np.max(np.abs(dense)))
    if max_entry == 0.0:
        return 0.0
    eta = np.full(len(x), 0.5 / (n * max_entry))
    for _ in range(50):
        grad = 3.0 * np.einsum("ijk,sj,sk->si", dense, x, x)
        grad -= np.einsum("si,si->s", grad, x)[:, None] * x
        xn = x + eta[:, None] * grad
        xn /= np.linalg.norm(xn, axis=1, keepdims=True)
        fn = np.einsum("ijk,si,sj,sk->s", dense, xn, xn, xn)
        worse = fn < f
        eta[worse] *= 0.5
        x[~worse] = xn[~worse]
        f[~worse] = fn[~worse]
    return float(max(np.max(vals), np.max(f)))


def multiplicity_one(
    s: SymCubic,
    tol: float = 0.05,
    *,
    spectrum: AdaptedSpectrum | None = None,
    points: int | None = None,
) -> bool:
    """Near-maximizer enumeration: True iff every grid direction within tol
    of the maximum value lies within 10*tol of e1 (no antipodal folding; the
    form is odd)."""
    if spectrum is None:
        spectrum = theta(s)
    if spectrum.theta == 0.0:
        return False
    n = s.n
    count = points if points is not None else _MULTIPLICITY_POINTS
    if n <= 4:
        grid = sphere_grid(n, count)
    else:
        rng = np.random.default_rng(0)
        grid = rng.standard_normal((count, n))
        grid /= np.linalg.norm(grid, axis=1, keepdims=True)
    vals = cubic_form_many(s, grid)
    near = grid[vals >= spectrum.theta - tol]
    if len(near) == 0:
        return True
    dist = np.linalg.norm(near - spectrum.e1, axis=1)
    return bool(np.all(dist <= 10.0 * tol))


def canonical3(s: SymCubic, *, tol: float = TOL_CANON, theta_opts: dict | None = None) -> Canonical3:
    """Normal form of a traceless tensor on R^3.

    In the adapted basis the first slice is diag(l1+l2, -l1, -l2) and the
    off-slice entries reduce to (m1, m2); the invariants are
    x = (l1+l2)^2, y = (l1-l2)^2, z = 4(m1^2+m2^2).
    """
    if s.n != 3:
        raise DimensionError(f"canonical form is a 3-dimensional reduction, got n = {s.n}")
    _require_traceless(s, 1e-8, "canonical3")
    spectrum = theta(s, **(theta_opts or {}))
    rotation = spectrum.basis
    r = conjugate(s, rotation)

    scale = max(1.0, float(np.max(np.abs(s.dense))))
    structural = max(abs(r.get(1, 1, 2)), abs(r.get(1, 1, 3)), abs(r.get(1, 2, 3)))
    if structural > tol * scale:
        raise ConvergenceError(
            f"canonical rotation residual {structural:.3e} exceeds {tol:.1e}",
            best=spectrum,
        )

    lambda1 = -r.get(1, 2, 2)
    lambda2 = -r.get(1, 3, 3)
    mu1 = r.get(2, 2, 2)
    mu2 = r.get(2, 2, 3)
    return Canonical3(
        lambda1=lambda1,
        lambda2=lambda2,
        mu1=mu1,
        mu2=mu2,
        x=(lambda1 + lambda2) ** 2,
        y=(lambda1 - lambda2) ** 2,
        z=4.0 * (mu1 * mu1 + mu2 * mu2),
        rotation=rotation,
    )


def reconstruct_canonical3(c: Canonical3) -> SymCubic:
    """Tensor rebuilt from the normal-form parameters and rotation."""
    dense = np.zeros((3, 3, 3))
    entries = {
        (0, 0, 0): c.lambda1 + c.lambda2,
        (0, 1, 1): -c.lambda1,
        (0, 2, 2): -c.lambda2,
        (1, 1, 1): c.mu1,
        (1, 1, 2): c.mu2,
        (1, 2, 2): -c.mu1,
        (2, 2, 2): -c.mu2,
    }
    from itertools import permutations as _perms

    for (i, j, k), v in entries.items():
        for p in set(_perms((i, j, k))):
            dense[p] = v
    back = np.einsum("ia,jb,kc,abc->ijk", c.rotation.T, c.rotation.T, c.rotation.T, dense, optimize=True)
    return sym3_from_dense(back, symmetrize=True)
