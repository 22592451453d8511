"""Spectral bisection: cut the second eigenvector at zero, or sweep it.

Implements the bisection procedure for all four matrix kinds.  The
random-walk Laplacian is handled through its similarity to the symmetric
form: its second eigenvector is D^{-1/2} times the symmetric one, which
has the same signs and ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .eigen import DEGENERACY_GAP, EigenResult, canonical_signs, smallest_eigenpairs
from .graph import (
    DENSE_CAP,
    Graph,
    MatrixKind,
    SymmetricOperator,
    graph_from_adjacency,
    matrix,
)
from .streams import Seed, stable_stream


def zero_cut(u2: np.ndarray) -> np.ndarray:
    """Labels from the strict zero rule: u2[v] < 0 goes to side 1, zeros to side 0."""
    return (np.asarray(u2) < 0).astype(np.int8)


def sweep_cut(u2: np.ndarray) -> np.ndarray:
    """Labels putting the n/2 smallest entries on side 1; ties to the lower index."""
    u2 = np.asarray(u2)
    order = np.argsort(u2, kind="stable")
    labels = np.zeros(len(u2), dtype=np.int8)
    labels[order[: len(u2) // 2]] = 1
    return labels


_CUTS = {"zero": zero_cut, "sweep": sweep_cut}


@dataclass
class BisectionOutput:
    """Cut labels with the embedding that produced them.

    For the Laplacian kinds ``lambda2``/``lambda3`` are the second and
    third smallest eigenvalues; for the adjacency matrix they are the
    second and third largest (the end of the spectrum the embedding
    comes from).
    """

    labels: np.ndarray
    u2: np.ndarray
    lambda2: float
    lambda3: float
    matrix_kind: MatrixKind
    cut_rule: str
    degeneracy_flag: bool
    eigen: EigenResult | None = None


def _negated(op):
    return SymmetricOperator(
        op.n,
        lambda x: -op.apply(x),
        lambda: -op.dense(),
        lambda: -op.sparse(),
        kind=op.kind,
        symmetric=op.symmetric,
        dense_cap=op.dense_cap,
    )


def second_embedding(
    g: Graph,
    kind: MatrixKind | str,
    tol: float | None = None,
    method: str = "auto",
    dense_cap: int = DENSE_CAP,
    seed: Seed | None = None,
    sym_eig: EigenResult | None = None,
) -> tuple[np.ndarray, float, float, bool, EigenResult]:
    """The embedding vector driving bisection for one matrix kind.

    Laplacian kinds embed by the second-smallest eigenvector.  The
    random-walk kind reuses (or accepts via ``sym_eig``) the symmetric
    solve through the degree similarity.  The adjacency matrix embeds by
    the second-largest eigenvector: that is the community-bearing end of
    its spectrum, and the one the reference experiments reproduce.

    Returns ``(u2, lambda2, lambda3, degeneracy_flag, eigenresult)``.
    """
    kind = MatrixKind(kind)
    if seed is None:
        seed = Seed(0, stable_stream("bisection-start"))
    k = min(3, g.n)
    negate = kind is MatrixKind.ADJACENCY
    if kind is MatrixKind.RW_NORMALIZED_LAPLACIAN:
        if sym_eig is None:
            op = matrix(g, MatrixKind.SYM_NORMALIZED_LAPLACIAN, dense_cap=dense_cap)
            sym_eig = smallest_eigenpairs(op, k, tol=tol, method=method, seed=seed)
        eig = sym_eig
        u2 = eig.vector(2) / np.sqrt(g.degrees.astype(float))
        u2 = canonical_signs((u2 / np.linalg.norm(u2))[:, None])[:, 0]
    else:
        op = matrix(g, kind, dense_cap=dense_cap)
        if negate:
            op = _negated(op)
        eig = smallest_eigenpairs(op, k, tol=tol, method=method, seed=seed)
        u2 = eig.vector(2)
    lambda2 = -eig.value(2) if negate else eig.value(2)
    lambda3 = (-eig.value(3) if negate else eig.value(3)) if k >= 3 else float("nan")
    degenerate = bool(k >= 3 and abs(eig.value(3) - eig.value(2)) < DEGENERACY_GAP)
    return u2, lambda2, lambda3, degenerate, eig


def spectral_bisection(
    g: Graph,
    kind: MatrixKind | str,
    cut: str = "zero",
    tol: float | None = None,
    method: str = "auto",
    dense_cap: int = DENSE_CAP,
    seed: Seed | None = None,
) -> BisectionOutput:
    """Bipartition ``g`` by the second eigenvector of the chosen matrix."""
    kind = MatrixKind(kind)
    if cut not in _CUTS:
        raise ValueError(f"cut must be one of {sorted(_CUTS)}, got {cut!r}")
    u2, lambda2, lambda3, degenerate, eig = second_embedding(
        g, kind, tol=tol, method=method, dense_cap=dense_cap, seed=seed
    )
    labels = _CUTS[cut](u2)
    return BisectionOutput(
        labels=labels,
        u2=u2,
        lambda2=lambda2,
        lambda3=lambda3,
        matrix_kind=kind,
        cut_rule=cut,
        degeneracy_flag=degenerate,
        eigen=eig,
    )


def recheck(output: BisectionOutput) -> bool:
    """True iff the stored partition is exactly the cut rule applied to stored u2."""
    return bool(np.array_equal(output.labels, _CUTS[output.cut_rule](output.u2)))


class SpectralBisection(ClusterMixin, BaseEstimator):
    """Two-cluster spectral bisection with the scikit-learn estimator API.

    Accepts a :class:`~semispec.graph.Graph` or a precomputed 0/1
    adjacency matrix (dense or sparse).  After ``fit``, ``labels_`` holds
    the {0,1} assignment and ``embedding_`` the second eigenvector used
    for the cut.

    Parameters
    ----------
    matrix_kind : which graph matrix drives the cut
        ("unnormalized", "sym", "rw", or "adjacency").
    cut : "zero" for the strict sign cut, "sweep" for the balanced sweep cut.
    tol : eigensolver residual tolerance (route default when None).
    method : "auto", "dense", or "iterative" eigensolver route.
    dense_cap : largest n for which the dense route is allowed.
    base_seed : seed for the iterative solver's start vector.
    """

    def __init__(self, matrix_kind="unnormalized", cut="zero", tol=None,
                 method="auto", dense_cap=DENSE_CAP, base_seed=0):
        self.matrix_kind = matrix_kind
        self.cut = cut
        self.tol = tol
        self.method = method
        self.dense_cap = dense_cap
        self.base_seed = base_seed

    def fit(self, X, y=None):
        g = X if isinstance(X, Graph) else graph_from_adjacency(X)
        out = spectral_bisection(
            g,
            self.matrix_kind,
            cut=self.cut,
            tol=self.tol,
            method=self.method,
            dense_cap=self.dense_cap,
            seed=Seed(self.base_seed, stable_stream("bisection-start")),
        )
        self.output_ = out
        self.labels_ = out.labels
        self.embedding_ = out.u2
        self.lambda2_ = out.lambda2
        self.lambda3_ = out.lambda3
        self.degenerate_ = out.degeneracy_flag
        self.n_features_in_ = g.n
        return self
