"""Pinching quantities and the algebraic inequalities behind them.

Everything here is exact algebra in the tensor invariants: the family of
quartic inequalities in the canonical (x,y,z) variables, the Laplacian
lower-bound thresholds for the two ambient constants (4 and 15/4), Newton's
inequality for the elementary symmetric functions, the spectral chain for
beta = mu1^2 + 3*sum_{j>1} mu_j^2, and the per-tensor PinchReport gathering
all signed gaps (positive = pinched).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cubic_spectrum import AdaptedSpectrum, theta
from .errors import ConsistencyError, DomainError
from .tensor_core import SymCubic, invariants, _require_traceless

KAPPA_MIN = 1.4  # inequality asserted for kappa >= 7/5 only

AMBIENT_SPHERE = "sphere4"
AMBIENT_NEARLY_KAHLER = "nearly_kahler_15_4"
_AMBIENT_CONSTANTS = {AMBIENT_SPHERE: 4.0, AMBIENT_NEARLY_KAHLER: 15.0 / 4.0}


@dataclass(frozen=True, eq=False)
class PinchReport:
    """Per-tensor record of every pinching quantity; n=3-only gaps are None otherwise."""

    n: int
    norm_sq: float
    theta: float
    beta: float
    gap_main: float
    gap_n3_quadratic: float | None
    gap_thm2: float | None
    gap_appendix: float | None
    simons_gap: float
    mu: np.ndarray
    lagrange_residual: float
    flags: dict


@dataclass(frozen=True)
class LaplacianBound:
    threshold: float
    bound: float


@dataclass(frozen=True)
class BetaChain:
    beta: float
    stationarity: float
    bound_ratio: float
    passes: bool


def kappa_gap_xyz(x, y, z, kappa):
    """RHS - LHS of the kappa-family inequality, vectorized in (x, y, z).

    LHS = gram - |s|^4/5 = (3/2)x^2 + (3/10)y^2 + (3/10)z^2 + 3xy + (9/10)yz,
    RHS = (2k/5)(|s|^2 - ((5k-3)/(2k)) x)|s|^2 with |s|^2 = (5/2)x+(3/2)y+z
    and Theta^2 = x.  Nonnegative for kappa >= 7/5; zero iff y = z = 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    lhs = 1.5 * x * x + 0.3 * y * y + 0.3 * z * z + 3.0 * x * y + 0.9 * y * z
    ns = 2.5 * x + 1.5 * y + z
    rhs = (2.0 * kappa / 5.0) * (ns - ((5.0 * kappa - 3.0) / (2.0 * kappa)) * x) * ns
    return rhs - lhs


def kappa_inequality_gap(c, kappa: float) -> float:
    """Gap of the kappa-family inequality for a canonical form; kappa >= 7/5."""
    if kappa < KAPPA_MIN:
        raise DomainError(f"inequality asserted only for kappa >= 7/5, got {kappa}")
    return float(kappa_gap_xyz(c.x, c.y, c.z, kappa))


def laplacian_threshold(theta_sq: float, ambient: str) -> float:
    if ambient == AMBIENT_SPHERE:
        return (10.0 / 7.0) * (1.0 + theta_sq)
    if ambient == AMBIENT_NEARLY_KAHLER:
        return 75.0 / 56.0 + (10.0 / 7.0) * theta_sq
    raise DomainError(f"unknown ambient {ambient!r}")


def laplacian_lower_bound(c, ambient: str) -> LaplacianBound:
    """Threshold and Laplacian lower bound (14/5)(threshold - |s|^2)|s|^2.

    Verifies on the way out that c_amb*|s|^2 - 5*gram + |s|^4 >= bound
    (c_amb = 4 or 15/4), which is the kappa = 7/5 inequality combined with
    the three-dimensional identity comm = 4*gram - |s|^4.
    """
    threshold = laplacian_threshold(c.x, ambient)
    ns = c.norm_sq
    bound = (14.0 / 5.0) * (threshold - ns) * ns
    c_amb = _AMBIENT_CONSTANTS[ambient]
    lhs = c_amb * ns - 5.0 * c.gram + ns * ns
    if lhs < bound - 1e-9 * max(1.0, ns * ns):
        raise ConsistencyError(f"Laplacian bound violated: {lhs:.12g} < {bound:.12g}")
    return LaplacianBound(threshold=threshold, bound=bound)


def newton_gap(a) -> float:
    """RHS - LHS of e3 <= (2(m-2)/(3(m-1))) e2^2/e1 on m = n-1 values.

    Requires a positive sum; nonnegative for nonnegative inputs, with
    equality exactly when all entries are equal.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or len(a) < 2:
        raise DomainError("newton_gap expects at least two values")
    e1 = float(np.sum(a))
    if e1 <= 0.0:
        raise DomainError(f"sum must be positive, got {e1}")
    p2 = float(np.sum(a * a))
    p3 = float(np.sum(a * a * a))
    e2 = 0.5 * (e1 * e1 - p2)
    m = len(a)
    # empty triple sum for m = 2 (and the coefficient 2(m-2) vanishes with it)
    e3 = 0.0 if m == 2 else (e1**3 - 3.0 * e1 * p2 + 2.0 * p3) / 6.0
    rhs = (2.0 * (m - 2) / (3.0 * (m - 1))) * e2 * e2 / e1
    return rhs - e3


def beta_stationarity_batch(mu: np.ndarray, n: int):
    """(beta, stationarity, target) for a (B, n) batch of adapted spectra."""
    mu1 = mu[:, 0]
    rest = mu[:, 1:]
    sum_sq = np.sum(rest * rest, axis=1)
    sum_cu = np.sum(rest**3, axis=1)
    beta = mu1 * mu1 + 3.0 * sum_sq
    stationarity = (n + 1) * mu1 - mu1**3 + 2.0 * sum_cu - 3.0 * mu1 * sum_sq
    target = (n + 2) / math.sqrt(n) * mu1
    return beta, stationarity, target


def beta_chain_check(mu, n: int) -> BetaChain:
    """Spectral chain at a maximizer: stationarity sign, beta and its bounds.

    Preconditions: sum(mu) = 0, mu[0] is the (positive) maximum.  passes
    reports the implication (stationarity <= 0 and mu1 >= 2 mu2)
    => beta >= (n+2)/sqrt(n) mu1; the Cauchy-Schwarz floor
    beta >= (n+2)/(n-1) mu1^2 is always asserted.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (n,):
        raise DomainError(f"expected {n} values, got shape {mu.shape}")
    scale = max(1.0, float(np.max(np.abs(mu))))
    if abs(float(np.sum(mu))) > 1e-10 * scale:
        raise DomainError("spectrum must be traceless (sum zero)")
    mu1 = float(mu[0])
    if mu1 <= 0.0:
        raise DomainError("mu1 must be positive")
    if mu1 < float(np.max(mu)) - 1e-12 * scale:
        raise DomainError("mu1 must be the maximum")
    beta_arr, stat_arr, target_arr = beta_stationarity_batch(mu[None, :], n)
    beta, stationarity, target = float(beta_arr[0]), float(stat_arr[0]), float(target_arr[0])
    cs_floor = (n + 2) / (n - 1) * mu1 * mu1
    if beta < cs_floor - 1e-9 * max(1.0, cs_floor):
        raise ConsistencyError(
            f"beta = {beta:.12g} below the Cauchy-Schwarz floor {cs_floor:.12g}"
        )
    mu2 = float(mu[1]) if n > 1 else -mu1
    admissible = stationarity <= 0.0 and mu1 >= 2.0 * mu2
    passes = (not admissible) or beta >= target - 1e-9
    return BetaChain(
        beta=beta,
        stationarity=stationarity,
        bound_ratio=beta / target,
        passes=bool(passes),
    )


def sample_admissible_mu(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random admissible spectra: traceless, sorted descending, mu1 >= 2 mu2,
    stationarity <= 0.

    Directions are sampled and then rescaled past the stationarity-zero
    radius c0 = sqrt((n+1) mu1 / K) (the cubic coefficient K is positive for
    every direction passing the mu1 >= 2 mu2 filter), so admissibility holds
    by construction.
    """
    out = np.empty((0, n))
    while len(out) < count:
        z = rng.standard_normal((2 * count, n))
        z -= z.mean(axis=1, keepdims=True)
        z = -np.sort(-z, axis=1)
        keep = (z[:, 0] > 1e-8) & (z[:, 0] >= 2.0 * z[:, 1])
        z = z[keep]
        mu1 = z[:, 0]
        rest = z[:, 1:]
        k = mu1**3 - 2.0 * np.sum(rest**3, axis=1) + 3.0 * mu1 * np.sum(rest**2, axis=1)
        z = z[k > 0]
        k = k[k > 0]
        c0 = np.sqrt((n + 1) * z[:, 0] / k)
        factor = c0 * (1.0 + 1e-6 + np.abs(rng.normal(0.0, 0.7, size=len(z))))
        out = np.vstack([out, z * factor[:, None]])
    mu = out[:count]
    _, stat, _ = beta_stationarity_batch(mu, n)
    return mu[stat <= 0.0] if np.any(stat > 0.0) else mu


def pinching_report(
    s: SymCubic,
    *,
    trace_tol: float = 1e-10,
    spectrum: AdaptedSpectrum | None = None,
    theta_opts: dict | None = None,
) -> PinchReport:
    """All pinching gaps of one traceless tensor (gaps signed, positive = pinched).

    For finite-difference tensors pass a relaxed trace_tol; the reported
    gaps depend on the trace residual only at that same order.
    """
    _require_traceless(s, trace_tol, "pinching_report")
    n = s.n
    inv = invariants(s)
    if spectrum is None:
        spectrum = theta(s, **(theta_opts or {}))
    th = spectrum.theta
    mu = spectrum.mu
    ns = inv.norm_sq

    beta = float(mu[0] ** 2 + 3.0 * np.sum(mu[1:] ** 2))
    # identity checks degrade with the declared trace residual of the input
    # (finite-difference tensors are traceless only to their FD error)
    tol = max(1e-9, trace_tol) * max(1.0, ns)
    if beta > ns + tol:
        raise ConsistencyError(f"beta = {beta:.12g} exceeds |s|^2 = {ns:.12g}")
    if beta < (n + 2) / (n - 1) * th * th - tol:
        raise ConsistencyError("beta below its Cauchy-Schwarz floor")

    gap_main = (n + 2) / math.sqrt(n) * th - ns
    gap_n3_quadratic = gap_thm2 = gap_appendix = None
    if n == 3:
        gap_n3_quadratic = 2.0 + th * th - ns
        gap_thm2 = (10.0 / 7.0) * (1.0 + th * th) - ns
        gap_appendix = 75.0 / 56.0 + (10.0 / 7.0) * th * th - ns
        # main pinching implies the quadratic n=3 condition pointwise
        if gap_main >= 0.0 and gap_n3_quadratic < -tol:
            raise ConsistencyError("n=3 implication violated on computed values")
    if n == 2 and abs(ns - 4.0 * th * th) > max(1e-8, trace_tol) * max(1.0, ns):
        raise ConsistencyError(f"|s|^2 = {ns:.12g} != 4 Theta^2 = {4*th*th:.12g} at n=2")

    flags = {"main": bool(gap_main >= 0.0)}
    for name, gap in (
        ("n3_quadratic", gap_n3_quadratic),
        ("thm2", gap_thm2),
        ("appendix", gap_appendix),
    ):
        flags[name] = None if gap is None else bool(gap >= 0.0)

    return PinchReport(
        n=n,
        norm_sq=ns,
        theta=th,
        beta=beta,
        gap_main=gap_main,
        gap_n3_quadratic=gap_n3_quadratic,
        gap_thm2=gap_thm2,
        gap_appendix=gap_appendix,
        simons_gap=(n + 1) * ns - inv.gram - inv.comm,
        mu=mu,
        lagrange_residual=spectrum.lagrange_residual,
        flags=flags,
    )
