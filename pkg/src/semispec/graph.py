"""Immutable simple undirected graphs and their associated matrices.

Vertices are numbered 1..n in every pair-based interface (edge lists,
files, CLI); all array quantities (degrees, labels, eigenvectors) are
plain numpy arrays where position ``i`` belongs to vertex ``i + 1``.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable

import numpy as np
import scipy.sparse as sp

DENSE_CAP = 512


class GraphError(ValueError):
    pass


class IsolatedVertexError(GraphError):
    """A normalized operator was requested on a graph with a degree-0 vertex."""

    def __init__(self, vertex: int):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} has degree 0; normalized Laplacians are undefined")


class DenseCapError(ValueError):
    pass


class MatrixKind(Enum):
    ADJACENCY = "adjacency"
    UNNORMALIZED_LAPLACIAN = "unnormalized"
    SYM_NORMALIZED_LAPLACIAN = "sym"
    RW_NORMALIZED_LAPLACIAN = "rw"


class Graph:
    """Simple undirected graph with canonical (u < v, lexicographic) edges.

    Immutable after construction; safe to share across workers.  Use
    :func:`build_graph` to construct from 1-based pairs.
    """

    __slots__ = ("n", "_edges", "_degrees", "_csr", "_neighbors", "adversary_edges")

    def __init__(self, n: int, edges0: np.ndarray, adversary_edges: int = 0):
        self.n = int(n)
        e = np.asarray(edges0, dtype=np.int64).reshape(-1, 2)
        e.flags.writeable = False
        self._edges = e
        self._degrees = None
        self._csr = None
        self._neighbors = None
        self.adversary_edges = int(adversary_edges)

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_arrays(n: int, u: np.ndarray, v: np.ndarray, adversary_edges: int = 0) -> "Graph":
        """Build from 0-based endpoint arrays; canonicalizes and deduplicates."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        e = np.stack([lo, hi], axis=1)
        if e.size:
            e = np.unique(e, axis=0)
        return Graph(n, e, adversary_edges)

    # -- basic accessors ----------------------------------------------------

    @property
    def num_edges(self) -> int:
        return self._edges.shape[0]

    @property
    def edge_array(self) -> np.ndarray:
        """(m, 2) int64 array of 0-based endpoints, u < v, sorted."""
        return self._edges

    def edges(self) -> list[tuple[int, int]]:
        """Edges as 1-based (u, v) tuples, u < v, lexicographically sorted."""
        return [(int(a) + 1, int(b) + 1) for a, b in self._edges]

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            d = np.bincount(self._edges.ravel(), minlength=self.n)
            d.flags.writeable = False
            self._degrees = d
        return self._degrees

    def degree(self, v: int) -> int:
        """Degree of 1-based vertex v."""
        return int(self.degrees[v - 1])

    @property
    def csr(self) -> sp.csr_matrix:
        """Shared adjacency matrix view (0/1, symmetric, no self-loops)."""
        if self._csr is None:
            m = self.num_edges
            if m:
                u, v = self._edges[:, 0], self._edges[:, 1]
                data = np.ones(2 * m)
                a = sp.coo_matrix(
                    (data, (np.concatenate([u, v]), np.concatenate([v, u]))),
                    shape=(self.n, self.n),
                )
            else:
                a = sp.coo_matrix((self.n, self.n))
            self._csr = a.tocsr()
        return self._csr

    def neighbors(self, v: int) -> list[int]:
        """Sorted 1-based neighbor list of 1-based vertex v."""
        if self._neighbors is None:
            nbr: list[list[int]] = [[] for _ in range(self.n)]
            for a, b in self._edges:
                nbr[a].append(int(b) + 1)
                nbr[b].append(int(a) + 1)
            self._neighbors = [sorted(x) for x in nbr]
        return self._neighbors[v - 1]

    def has_edge(self, u: int, v: int) -> bool:
        a, b = min(u, v) - 1, max(u, v) - 1
        i = np.searchsorted(self._edges[:, 0], a, side="left")
        j = np.searchsorted(self._edges[:, 0], a, side="right")
        return bool(np.any(self._edges[i:j, 1] == b))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"


def build_graph(n: int, edge_pairs: Iterable[tuple[int, int]]) -> Graph:
    """Construct a Graph from 1-based vertex pairs.

    Pairs are canonicalized (u < v), deduplicated and sorted.  Raises
    :class:`GraphError` on out-of-range endpoints, self-loops, or n < 2.
    """
    n = int(n)
    if n < 2:
        raise GraphError(f"need n >= 2, got {n}")
    pairs = np.asarray(list(edge_pairs), dtype=np.int64).reshape(-1, 2)
    if pairs.size:
        if pairs.min() < 1 or pairs.max() > n:
            bad = pairs[(pairs < 1).any(axis=1) | (pairs > n).any(axis=1)][0]
            raise GraphError(f"endpoint out of range 1..{n}: {tuple(int(x) for x in bad)}")
        if np.any(pairs[:, 0] == pairs[:, 1]):
            v = int(pairs[pairs[:, 0] == pairs[:, 1]][0, 0])
            raise GraphError(f"self-loop at vertex {v}")
    return Graph.from_arrays(n, pairs[:, 0] - 1, pairs[:, 1] - 1)


def graph_from_adjacency(a) -> Graph:
    """Build a Graph from a dense or sparse 0/1 adjacency matrix.

    The matrix must be square, symmetric, binary, with a zero diagonal.
    """
    if sp.issparse(a):
        a = a.tocoo()
        n = a.shape[0]
        if a.shape[0] != a.shape[1]:
            raise GraphError("adjacency matrix must be square")
        mask = (a.row < a.col) & (a.data != 0)
        u, v = a.row[mask], a.col[mask]
        dense_check = a.tocsr()
        if (dense_check != dense_check.T).nnz:
            raise GraphError("adjacency matrix must be symmetric")
        if dense_check.diagonal().any():
            raise GraphError("adjacency matrix must have a zero diagonal")
    else:
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError("adjacency matrix must be square")
        if not np.array_equal(a, a.T):
            raise GraphError("adjacency matrix must be symmetric")
        if np.any(np.diag(a) != 0):
            raise GraphError("adjacency matrix must have a zero diagonal")
        u, v = np.nonzero(np.triu(a, k=1))
        n = a.shape[0]
    return Graph.from_arrays(n, u, v)


# -- matrices ---------------------------------------------------------------


class SymmetricOperator:
    """A linear operator with on-demand dense/sparse materialization.

    ``apply`` is exact; ``dense()`` is only offered up to ``dense_cap``
    (tests need a dense oracle, experiments never need O(n^2) memory).
    The random-walk Laplacian is the one non-symmetric kind and is
    flagged ``symmetric=False``.
    """

    def __init__(self, n, matvec, make_dense, make_sparse, kind=None,
                 symmetric=True, dense_cap=DENSE_CAP):
        self.n = int(n)
        self._matvec = matvec
        self._make_dense = make_dense
        self._make_sparse = make_sparse
        self.kind = kind
        self.symmetric = bool(symmetric)
        self.dense_cap = int(dense_cap)
        self._dense = None
        self._sparse = None

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} vector, got shape {x.shape}")
        return self._matvec(x)

    @property
    def dense_available(self) -> bool:
        return self.n <= self.dense_cap

    def dense(self) -> np.ndarray:
        if not self.dense_available:
            raise DenseCapError(
                f"dense materialization only for n <= {self.dense_cap}, got n = {self.n}"
            )
        if self._dense is None:
            d = np.asarray(self._make_dense(), dtype=float)
            d.flags.writeable = False
            self._dense = d
        return self._dense

    def sparse(self) -> sp.csr_matrix:
        if self._sparse is None:
            self._sparse = self._make_sparse().tocsr()
        return self._sparse


def _dense_adjacency(g: Graph) -> np.ndarray:
    return g.csr.toarray()


def matrix(g: Graph, kind: MatrixKind, dense_cap: int = DENSE_CAP) -> SymmetricOperator:
    """The requested matrix operator for ``g``.

    Normalized kinds require minimum degree >= 1 and raise
    :class:`IsolatedVertexError` otherwise.  Operators share the graph's
    adjacency storage; nothing is copied.
    """
    kind = MatrixKind(kind)
    a = g.csr
    deg = g.degrees.astype(float)

    if kind in (MatrixKind.SYM_NORMALIZED_LAPLACIAN, MatrixKind.RW_NORMALIZED_LAPLACIAN):
        if g.n and deg.min() == 0:
            raise IsolatedVertexError(int(np.argmin(deg)) + 1)

    if kind is MatrixKind.ADJACENCY:
        return SymmetricOperator(
            g.n,
            lambda x: a @ x,
            lambda: _dense_adjacency(g),
            lambda: a,
            kind=kind,
            dense_cap=dense_cap,
        )
    if kind is MatrixKind.UNNORMALIZED_LAPLACIAN:
        return SymmetricOperator(
            g.n,
            lambda x: deg * x - a @ x,
            lambda: np.diag(deg) - _dense_adjacency(g),
            lambda: sp.diags(deg) - a,
            kind=kind,
            dense_cap=dense_cap,
        )
    dinv_sqrt = 1.0 / np.sqrt(deg)
    if kind is MatrixKind.SYM_NORMALIZED_LAPLACIAN:
        return SymmetricOperator(
            g.n,
            lambda x: x - dinv_sqrt * (a @ (dinv_sqrt * x)),
            lambda: np.eye(g.n) - dinv_sqrt[:, None] * _dense_adjacency(g) * dinv_sqrt[None, :],
            lambda: sp.eye(g.n) - sp.diags(dinv_sqrt) @ a @ sp.diags(dinv_sqrt),
            kind=kind,
            dense_cap=dense_cap,
        )
    # random-walk Laplacian: I - D^{-1} A, similar to the symmetric form
    dinv = 1.0 / deg
    return SymmetricOperator(
        g.n,
        lambda x: x - dinv * (a @ x),
        lambda: np.eye(g.n) - dinv[:, None] * _dense_adjacency(g),
        lambda: sp.eye(g.n) - sp.diags(dinv) @ a,
        kind=kind,
        symmetric=False,
        dense_cap=dense_cap,
    )


def degree_split(g: Graph, planted: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex internal/crossing degree counts against a balanced partition.

    Returns ``(d_in, d_out)`` with ``d_in + d_out == degrees``.
    """
    labels = check_partition(planted, g.n)
    if 2 * int(labels.sum()) != g.n:
        raise GraphError("planted partition must be balanced (n/2 zeros and n/2 ones)")
    d_in = np.zeros(g.n, dtype=np.int64)
    d_out = np.zeros(g.n, dtype=np.int64)
    if g.num_edges:
        u, v = g.edge_array[:, 0], g.edge_array[:, 1]
        same = labels[u] == labels[v]
        np.add.at(d_in, u[same], 1)
        np.add.at(d_in, v[same], 1)
        np.add.at(d_out, u[~same], 1)
        np.add.at(d_out, v[~same], 1)
    return d_in, d_out


def check_partition(labels, n: int | None = None) -> np.ndarray:
    """Validate a {0,1} label vector and return it as an int8 array."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise GraphError("labels must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise GraphError(f"label vector length {arr.shape[0]} != n = {n}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise GraphError("labels must be 0 or 1")
    return arr.astype(np.int8)


# -- file formats -------------------------------------------------------------


def write_edge_list(g: Graph, path) -> None:
    """Write the bit-exact edge-list format: "n m" then sorted "u v" lines."""
    with open(path, "w", newline="\n") as f:
        f.write(f"{g.n} {g.num_edges}\n")
        for u, v in g.edge_array:
            f.write(f"{u + 1} {v + 1}\n")


def read_edge_list(path) -> Graph:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 2:
            raise GraphError(f"{path}: expected header 'n m'")
        n, m = int(header[0]), int(header[1])
        pairs = []
        for line in f:
            line = line.strip()
            if not line:
                continue
            u, v = line.split()
            pairs.append((int(u), int(v)))
    if len(pairs) != m:
        raise GraphError(f"{path}: header says {m} edges, found {len(pairs)}")
    return build_graph(n, pairs)


def write_partition(labels: np.ndarray, path) -> None:
    labels = check_partition(labels)
    with open(path, "w", newline="\n") as f:
        for x in labels:
            f.write(f"{int(x)}\n")


def read_partition(path) -> np.ndarray:
    with open(path) as f:
        vals = [line.strip() for line in f if line.strip()]
    if any(v not in ("0", "1") for v in vals):
        raise GraphError(f"{path}: partition lines must be 0 or 1")
    return np.array([int(v) for v in vals], dtype=np.int8)
