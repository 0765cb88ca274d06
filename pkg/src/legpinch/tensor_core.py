"""Symmetric order-3 tensor algebra on R^n.

Stores a fully symmetric cubic tensor by its C(n+2,3) distinct components,
so index-permutation symmetry is exact by construction.  On top of that sit
the quadratic/quartic invariants (|s|^2, the Gram and commutator sums over
slices), the slice-commutator algebraic curvature with its Ricci/scalar/Weyl
decomposition, and the purely algebraic right-hand side of the rough
Laplacian identity for the minimal (traceless) case.

Conventions: public accessors and the text file format are 1-based, matching
the usual index notation; the dense numpy view is 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement, permutations
from pathlib import Path

import numpy as np

from .errors import DimensionError, TraceError

TOL_TRACE = 1e-10
TOL_SYM = 1e-10

_SWEEP_CHUNK = 16384


@lru_cache(maxsize=None)
def _index_maps(n: int):
    """Canonical (i<=j<=k) combos (0-based), their rank map and multiplicities."""
    combos = list(combinations_with_replacement(range(n), 3))
    rank = {c: r for r, c in enumerate(combos)}
    mult = np.array([len(set(permutations(c))) for c in combos], dtype=float)
    return combos, rank, mult


def distinct_count(n: int) -> int:
    return math.comb(n + 2, 3)


@dataclass(frozen=True, eq=False)
class SymCubic:
    """Fully symmetric order-3 tensor, stored by distinct components."""

    n: int
    distinct: np.ndarray  # shape (C(n+2,3),), read-only

    def __post_init__(self):
        if self.n < 2:
            raise DimensionError(f"tensor dimension must be >= 2, got {self.n}")
        arr = np.asarray(self.distinct, dtype=float)
        if arr.shape != (distinct_count(self.n),):
            raise DimensionError(
                f"expected {distinct_count(self.n)} distinct components, got {arr.shape}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "distinct", arr)

    @property
    def dense(self) -> np.ndarray:
        """Dense (n,n,n) view; symmetric entries are bitwise-identical copies."""
        cached = getattr(self, "_dense", None)
        if cached is None:
            cached = dense_from_distinct(self.n, self.distinct[None, :])[0]
            cached.flags.writeable = False
            object.__setattr__(self, "_dense", cached)
        return cached

    def get(self, i: int, j: int, k: int) -> float:
        """Component s_{ijk} with 1-based indices; any index order."""
        for idx in (i, j, k):
            if not 1 <= idx <= self.n:
                raise IndexError(f"index {idx} outside [1, {self.n}]")
        _, rank, _ = _index_maps(self.n)
        key = tuple(sorted((i - 1, j - 1, k - 1)))
        return float(self.distinct[rank[key]])

    def trace_slices(self) -> np.ndarray:
        """t_i = sum_k s_{ikk}."""
        return np.einsum("ikk->i", self.dense)

    def is_traceless(self, tol: float = TOL_TRACE) -> bool:
        return bool(np.max(np.abs(self.trace_slices())) <= tol)

    def norm_sq(self) -> float:
        d = self.dense
        return float(np.einsum("ijk,ijk->", d, d))

    def scaled(self, c: float) -> "SymCubic":
        return SymCubic(self.n, c * self.distinct)

    def __neg__(self) -> "SymCubic":
        return self.scaled(-1.0)


def dense_from_distinct(n: int, values: np.ndarray) -> np.ndarray:
    """Scatter batched distinct components (B, C(n+2,3)) to dense (B,n,n,n)."""
    combos, _, _ = _index_maps(n)
    idx = np.array(combos)  # (K, 3)
    out = np.empty((values.shape[0], n, n, n), dtype=float)
    for p in permutations(range(3)):
        out[:, idx[:, p[0]], idx[:, p[1]], idx[:, p[2]]] = values
    return out


def distinct_from_dense(n: int, dense: np.ndarray) -> np.ndarray:
    combos, _, _ = _index_maps(n)
    idx = np.array(combos)
    return dense[..., idx[:, 0], idx[:, 1], idx[:, 2]]


def sym3_from_entries(n: int, entries: dict[tuple[int, int, int], float]) -> SymCubic:
    """Build a tensor from a map (i<=j<=k, 1-based) -> value; missing entries are 0."""
    if n < 2:
        raise DimensionError(f"tensor dimension must be >= 2, got {n}")
    _, rank, _ = _index_maps(n)
    values = np.zeros(distinct_count(n))
    for (i, j, k), v in entries.items():
        for idx in (i, j, k):
            if not 1 <= idx <= n:
                raise IndexError(f"index {idx} outside [1, {n}]")
        values[rank[tuple(sorted((i - 1, j - 1, k - 1)))]] = v
    return SymCubic(n, values)


def sym3_from_dense(dense: np.ndarray, symmetrize: bool = False) -> SymCubic:
    """Build from a dense (n,n,n) array.

    With symmetrize=True the array is averaged over all six index
    permutations first (used when the source carries numerical asymmetry,
    e.g. finite-difference data); otherwise the canonical i<=j<=k entries
    are read as-is.
    """
    dense = np.asarray(dense, dtype=float)
    if dense.ndim != 3 or len(set(dense.shape)) != 1:
        raise DimensionError(f"expected a cubic array, got shape {dense.shape}")
    n = dense.shape[0]
    if symmetrize:
        dense = symmetrize3(dense)
    return SymCubic(n, distinct_from_dense(n, dense))


def symmetrize3(dense: np.ndarray) -> np.ndarray:
    """Average of a (...,n,n,n) array over the six permutations of its last three axes."""
    k = dense.ndim - 3
    acc = np.zeros_like(dense)
    for p in permutations(range(3)):
        acc += dense.transpose(tuple(range(k)) + tuple(k + a for a in p))
    return acc / 6.0


def symmetry_deviation3(dense: np.ndarray) -> float:
    return float(np.max(np.abs(dense - symmetrize3(dense))))


def _require_traceless(s: SymCubic, tol: float, op: str) -> None:
    traces = s.trace_slices()
    worst = int(np.argmax(np.abs(traces)))
    if abs(traces[worst]) > tol:
        raise TraceError(
            f"{op} requires a traceless tensor: |trace of slice {worst + 1}| = "
            f"{abs(traces[worst]):.3e} > {tol:.1e}",
            slice_index=worst + 1,
        )


@dataclass(frozen=True)
class Invariants:
    norm_sq: float
    gram: float
    comm: float


def invariants(s: SymCubic) -> Invariants:
    """|s|^2, sum_ij <s_i,s_j>^2 and sum_ij |[s_i,s_j]|^2 by direct summation."""
    ns, gr, cm = invariants_batch(s.dense[None])
    return Invariants(float(ns[0]), float(gr[0]), float(cm[0]))


def invariants_batch(dense: np.ndarray):
    """Batched invariants for a (B,n,n,n) array of symmetric tensors."""
    norm_sq = np.einsum("Bijk,Bijk->B", dense, dense)
    g = np.einsum("Bikl,Bjkl->Bij", dense, dense)
    gram = np.einsum("Bij,Bij->B", g, g)
    prod = np.einsum("Biab,Bjbc->Bijac", dense, dense)
    comm_t = prod - prod.transpose(0, 2, 1, 3, 4)
    comm = np.einsum("Bijac,Bijac->B", comm_t, comm_t)
    return norm_sq, gram, comm


@dataclass(frozen=True)
class AlgCurvature:
    """Slice-commutator algebraic curvature with its derived scalars."""

    n: int
    rhat: np.ndarray  # (n,n,n,n)
    ricci: np.ndarray  # (n,n)
    scalar: float
    weyl_norm_sq: float | None  # None for n = 2
    traceless_ricci_norm_sq: float


def curvature_batch(dense: np.ndarray) -> np.ndarray:
    """R_{ijkl} = [s_i, s_j]_{kl} for a (B,n,n,n) batch."""
    r = np.einsum("bika,bjla->bijkl", dense, dense)
    return r - np.einsum("bila,bjka->bijkl", dense, dense)


def bianchi_residual_batch(rhat: np.ndarray) -> np.ndarray:
    """Max |R_{ijkl} + R_{iklj} + R_{iljk}| per batch element."""
    cyc = rhat + rhat.transpose(0, 1, 3, 4, 2) + rhat.transpose(0, 1, 4, 2, 3)
    return np.max(np.abs(cyc), axis=(1, 2, 3, 4))


def pair_symmetry_residual_batch(rhat: np.ndarray) -> np.ndarray:
    anti_i = rhat + rhat.transpose(0, 2, 1, 3, 4)
    anti_k = rhat + rhat.transpose(0, 1, 2, 4, 3)
    pair = rhat - rhat.transpose(0, 3, 4, 1, 2)
    return np.maximum(
        np.max(np.abs(anti_i), axis=(1, 2, 3, 4)),
        np.maximum(
            np.max(np.abs(anti_k), axis=(1, 2, 3, 4)),
            np.max(np.abs(pair), axis=(1, 2, 3, 4)),
        ),
    )


def _kulkarni_nomizu(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (
        np.einsum("ik,jl->ijkl", a, b)
        + np.einsum("jl,ik->ijkl", a, b)
        - np.einsum("il,jk->ijkl", a, b)
        - np.einsum("jk,il->ijkl", a, b)
    )


def _weyl_tensor(n: int, rhat: np.ndarray, ricci: np.ndarray, scalar: float) -> np.ndarray:
    eye = np.eye(n)
    ric0 = ricci - (scalar / n) * eye
    return (
        rhat
        - _kulkarni_nomizu(ric0, eye) / (n - 2)
        - (scalar / (2 * n * (n - 1))) * _kulkarni_nomizu(eye, eye)
    )


def algebraic_curvature(s: SymCubic, tol_trace: float = TOL_TRACE) -> AlgCurvature:
    """Curvature R_{ijkl} = [s_i,s_j]_{kl} of a traceless tensor.

    Tracelessness is required for Ric_{ij} = -<s_i,s_j> (and S = -|s|^2) to
    hold; both identities are asserted to TOL_SYM after construction.
    """
    _require_traceless(s, tol_trace, "algebraic_curvature")
    d = s.dense
    rhat = curvature_batch(d[None])[0]
    ricci = np.einsum("iaja->ij", rhat)
    g = np.einsum("ikl,jkl->ij", d, d)
    scalar = float(np.trace(ricci))
    norm_sq = float(np.einsum("ijk,ijk->", d, d))
    scale = max(1.0, norm_sq)
    if np.max(np.abs(ricci + g)) > TOL_SYM * scale or abs(scalar + norm_sq) > TOL_SYM * scale:
        raise TraceError(
            "Ricci identity residual exceeds tolerance; input is not traceless enough",
            slice_index=None,
        )
    ric0_norm_sq = float(np.sum((ricci - (scalar / s.n) * np.eye(s.n)) ** 2))
    weyl_norm_sq = None
    if s.n >= 3:
        w = _weyl_tensor(s.n, rhat, ricci, scalar)
        weyl_norm_sq = float(np.sum(w * w))
    return AlgCurvature(
        n=s.n,
        rhat=rhat,
        ricci=ricci,
        scalar=scalar,
        weyl_norm_sq=weyl_norm_sq,
        traceless_ricci_norm_sq=ric0_norm_sq,
    )


@dataclass(frozen=True)
class WeylDecomposition:
    weyl_norm_sq: float
    identity_residual: float


def weyl_decomposition(c: AlgCurvature) -> WeylDecomposition:
    """Weyl part of the orthogonal curvature decomposition (n >= 3).

    identity_residual reports | |R|^2 - |W|^2 - 4|Ric|^2/(n-2)
    + 2 S^2/((n-1)(n-2)) |, both sides evaluated directly.
    """
    n = c.n
    if n < 3:
        raise DimensionError("Weyl decomposition requires n >= 3")
    w = _weyl_tensor(n, c.rhat, c.ricci, c.scalar)
    weyl_norm_sq = float(np.sum(w * w))
    r_norm_sq = float(np.sum(c.rhat**2))
    ric_norm_sq = float(np.sum(c.ricci**2))
    residual = abs(
        r_norm_sq
        - weyl_norm_sq
        - 4.0 * ric_norm_sq / (n - 2)
        + 2.0 * c.scalar**2 / ((n - 1) * (n - 2))
    )
    return WeylDecomposition(weyl_norm_sq=weyl_norm_sq, identity_residual=residual)


def simons_rhs_batch(dense: np.ndarray) -> np.ndarray:
    """Algebraic Laplacian right-hand side for a (B,n,n,n) traceless batch."""
    n = dense.shape[-1]
    t1 = np.einsum("Bisl,Bjlt,Bkts->Bijk", dense, dense, dense, optimize=True)
    g = np.einsum("Biab,Bjab->Bij", dense, dense)
    corr = (
        np.einsum("Bis,Bsjk->Bijk", g, dense)
        + np.einsum("Bjs,Bsik->Bijk", g, dense)
        + np.einsum("Bks,Bsij->Bijk", g, dense)
    )
    return (n + 1) * dense + 2.0 * t1 - corr


def simons_rhs(s: SymCubic, tol_trace: float = TOL_TRACE) -> SymCubic:
    """(n+1)s + 2 tr(s_i s_j s_k) - sum_s <s_i,s_s> s_{sjk} - (j,k analogues).

    This is the purely algebraic right-hand side of the rough-Laplacian
    identity in the minimal (traceless) case; it vanishes identically for
    parallel tensors such as the Calabi family.
    """
    _require_traceless(s, tol_trace, "simons_rhs")
    rhs = simons_rhs_batch(s.dense[None])[0]
    if symmetry_deviation3(rhs) > TOL_SYM * max(1.0, float(np.max(np.abs(rhs)))):
        raise ArithmeticError("simons_rhs produced an asymmetric tensor")
    return sym3_from_dense(rhs)


def simons_gap(s: SymCubic) -> float:
    """(n+1)|s|^2 - gram - comm, composed exactly from invariants()."""
    inv = invariants(s)
    return (s.n + 1) * inv.norm_sq - inv.gram - inv.comm


def project_traceless_batch(dense: np.ndarray) -> np.ndarray:
    """Orthogonal projection of a symmetric (B,n,n,n) batch onto slice-traceless tensors."""
    n = dense.shape[-1]
    t = np.einsum("bikk->bi", dense)
    eye = np.eye(n)
    corr = (
        np.einsum("bi,jk->bijk", t, eye)
        + np.einsum("bj,ik->bijk", t, eye)
        + np.einsum("bk,ij->bijk", t, eye)
    )
    return dense - corr / (n + 2)


def random_traceless(n: int, rng: np.random.Generator) -> SymCubic:
    """Standard-normal distinct entries projected to the traceless subspace."""
    return sym3_from_dense(random_traceless_batch(n, 1, rng)[0])


def random_traceless_batch(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    values = rng.standard_normal((count, distinct_count(n)))
    return project_traceless_batch(dense_from_distinct(n, values))


def sweep_chunks(count: int, chunk: int = _SWEEP_CHUNK):
    """Yield chunk sizes covering `count`; keeps batched sweeps memory-bounded."""
    done = 0
    while done < count:
        take = min(chunk, count - done)
        yield take
        done += take


def save_tensor(s: SymCubic, path) -> None:
    """Text format: first line n, then `i j k value` per nonzero distinct component."""
    lines = [str(s.n)]
    combos, _, _ = _index_maps(s.n)
    for (i, j, k), v in zip(combos, s.distinct):
        if v != 0.0:
            lines.append(f"{i + 1} {j + 1} {k + 1} {v:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_tensor(path) -> SymCubic:
    entries: dict[tuple[int, int, int], float] = {}
    n = None
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            n = int(line)
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"malformed tensor line: {raw!r}")
        i, j, k = sorted(int(p) for p in parts[:3])
        if (i, j, k) in entries:
            raise ValueError(f"duplicate component ({i},{j},{k})")
        entries[(i, j, k)] = float(parts[3])
    if n is None:
        raise ValueError("tensor file is empty")
    return sym3_from_entries(n, entries)
