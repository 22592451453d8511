"""Smallest eigenpairs of graph operators, with certified residuals.

Two routes with one contract: a dense LAPACK decomposition for small
operators (the oracle), and restarted Lanczos (ARPACK) for everything
else.  Results carry honest residuals and deterministic canonical signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .graph import SymmetricOperator
from .streams import Seed, start_vector

DENSE_TOL_DEFAULT = 1e-8
ITERATIVE_TOL_DEFAULT = 1e-6
DEGENERACY_GAP = 1e-6


class NonConvergenceError(RuntimeError):
    def __init__(self, iterations: int, best_residual: float):
        self.iterations = int(iterations)
        self.best_residual = float(best_residual)
        super().__init__(
            f"eigensolver did not reach tolerance after {iterations} iterations "
            f"(best residual {best_residual:.3e})"
        )


@dataclass
class EigenResult:
    """Ascending eigenvalues with orthonormal, sign-canonical eigenvectors."""

    values: np.ndarray      # (k,)
    vectors: np.ndarray     # (n, k), columns are eigenvectors
    residuals: np.ndarray   # (k,) verified ||M u - lambda u||_2
    method: str             # "dense" | "iterative"
    tol: float

    @property
    def k(self) -> int:
        return len(self.values)

    def value(self, i: int) -> float:
        """1-based eigenvalue accessor: value(2) is the second smallest."""
        return float(self.values[i - 1])

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[:, i - 1]


def canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry (first on ties) is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        if out[i, j] < 0:
            out[:, j] = -out[:, j]
    return out


def _canonical_cluster_basis(vectors: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the span of ``vectors``.

    Gram-Schmidt over projections of a fixed direction sequence (the
    all-ones vector, then coordinate vectors), so the result depends only
    on the subspace, not on the solver's arbitrary basis choice.
    """
    n, d = vectors.shape
    basis: list[np.ndarray] = []

    def try_direction(w):
        pw = vectors @ (vectors.T @ w)
        for b in basis:
            pw = pw - (b @ pw) * b
        nrm = np.linalg.norm(pw)
        if nrm > 1e-6:
            basis.append(pw / nrm)

    try_direction(np.full(n, 1.0 / math.sqrt(n)))
    for i in range(n):
        if len(basis) == d:
            break
        e = np.zeros(n)
        e[i] = 1.0
        try_direction(e)
    if len(basis) < d:  # numerically defective; keep the solver's basis
        return vectors
    return np.stack(basis, axis=1)


def _canonicalize_degenerate(values: np.ndarray, vectors: np.ndarray,
                             spread_tol: float) -> np.ndarray:
    """Rotate numerically indistinguishable eigenvalue clusters to the
    canonical subspace basis; simple eigenvalues pass through."""
    out = vectors.copy()
    k = len(values)
    i = 0
    while i < k:
        j = i + 1
        while j < k and values[j] - values[j - 1] <= spread_tol:
            j += 1
        if j - i >= 2:
            out[:, i:j] = _canonical_cluster_basis(out[:, i:j])
        i = j
    return out


def _residuals(op: SymmetricOperator, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return np.array([
        np.linalg.norm(op.apply(vectors[:, i]) - values[i] * vectors[:, i])
        for i in range(len(values))
    ])


def dense_oracle(op: SymmetricOperator) -> EigenResult:
    """Full spectrum by direct dense symmetric eigendecomposition."""
    if not op.symmetric:
        raise ValueError("dense_oracle requires a symmetric operator")
    m = op.dense()
    values, vectors = np.linalg.eigh(m)
    vectors = _canonicalize_degenerate(values, vectors, spread_tol=0.5e-9)
    vectors = canonical_signs(vectors)
    res = _residuals(op, values, vectors)
    return EigenResult(values, vectors, res, method="dense", tol=1e-9)


def smallest_eigenpairs(
    op: SymmetricOperator,
    k: int,
    tol: float | None = None,
    method: str = "auto",
    seed: Seed | None = None,
    iteration_cap: int | None = None,
) -> EigenResult:
    """The k smallest eigenpairs of a symmetric operator.

    The dense route is used when the operator is materializable (n under
    the dense cap), Lanczos otherwise; ``method`` forces a route.  The
    returned residuals are re-verified against ``tol``.
    """
    if not op.symmetric:
        raise ValueError("smallest_eigenpairs requires a symmetric operator")
    n = op.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n = {n}, got k = {k}")
    if method not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "dense" if op.dense_available else "iterative"
    if method == "iterative" and k > n - 1:
        # Lanczos cannot deliver the full spectrum; fall back if we can
        if op.dense_available:
            method = "dense"
        else:
            raise ValueError("iterative route requires k <= n - 1")
    if tol is None:
        tol = DENSE_TOL_DEFAULT if method == "dense" else ITERATIVE_TOL_DEFAULT
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    if method == "dense":
        values, vectors = np.linalg.eigh(op.dense())
        values, vectors = values[:k], vectors[:, :k]
        iterations = 0
    else:
        values, vectors, iterations = _lanczos_smallest(op, k, tol, seed, iteration_cap)

    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = _canonicalize_degenerate(values, vectors[:, order], spread_tol=0.5 * tol)
    vectors = canonical_signs(vectors)
    res = _residuals(op, values, vectors)
    if res.max() > tol:
        raise NonConvergenceError(iterations, float(res.max()))
    return EigenResult(values, vectors, res, method=method, tol=tol)


def _lanczos_smallest(op, k, tol, seed, iteration_cap):
    m = op.sparse()
    n = op.n
    cap = iteration_cap if iteration_cap is not None else int(math.ceil(50 * k * math.sqrt(n)))
    v0 = start_vector(seed if seed is not None else Seed(0), n)
    # ARPACK's tol is relative to the operator scale; aim below the target
    scale = max(1.0, float(np.abs(m).sum(axis=1).max()))
    ncv = min(n, max(2 * k + 1, 20))
    last_err = None
    for arpack_tol in (tol / (10.0 * scale), 0.0):
        try:
            values, vectors = spla.eigsh(
                m, k=k, which="SA", v0=v0, tol=arpack_tol, maxiter=cap, ncv=ncv
            )
        except spla.ArpackNoConvergence as err:
            last_err = err
            continue
        res = np.array([
            np.linalg.norm(m @ vectors[:, i] - values[i] * vectors[:, i])
            for i in range(k)
        ])
        if res.max() <= tol:
            return values, vectors, cap
    if last_err is not None:
        partial = last_err.eigenvalues
        raise NonConvergenceError(cap, float("inf") if partial is None else float("nan"))
    raise NonConvergenceError(cap, float(res.max()))


def compare_eigenresults(
    ref: EigenResult,
    other: EigenResult,
    value_tol: float,
    vector_tol: float,
    cluster_gap: float = DEGENERACY_GAP,
) -> tuple[bool, str]:
    """Compare two eigensolves of the same operator, degeneracy-aware.

    Eigenvalues are compared pairwise; eigenvectors are compared directly
    for simple eigenvalues and as subspace projectors across clusters of
    near-equal eigenvalues (gap below ``cluster_gap``).
    """
    k = min(ref.k, other.k)
    dv = np.abs(ref.values[:k] - other.values[:k])
    if dv.max() > value_tol:
        return False, f"eigenvalue mismatch {dv.max():.3e} > {value_tol:g}"
    i = 0
    while i < k:
        j = i + 1
        while j < k and ref.values[j] - ref.values[j - 1] < cluster_gap:
            j += 1
        if j - i == 1:
            d = np.linalg.norm(ref.vectors[:, i] - other.vectors[:, i])
            d = min(d, np.linalg.norm(ref.vectors[:, i] + other.vectors[:, i]))
            if d > vector_tol:
                return False, f"eigenvector {i + 1} mismatch {d:.3e} > {vector_tol:g}"
        else:
            u = ref.vectors[:, i:j]
            v = other.vectors[:, i:j]
            d = np.linalg.norm(u @ u.T - v @ v.T, ord=2)
            if d > vector_tol:
                return False, (
                    f"subspace {i + 1}..{j} projector mismatch {d:.3e} > {vector_tol:g}"
                )
        i = j
    return True, ""
