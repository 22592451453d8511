import numpy as np
import pytest

from semispec.graph import (
    DenseCapError,
    GraphError,
    IsolatedVertexError,
    MatrixKind,
    build_graph,
    degree_split,
    graph_from_adjacency,
    matrix,
    read_edge_list,
    read_partition,
    write_edge_list,
    write_partition,
)
from semispec.streams import Seed, uniform_block


def complete_graph(n):
    return build_graph(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def path_graph(n):
    return build_graph(n, [(i, i + 1) for i in range(1, n)])


def cycle_graph(n):
    return build_graph(n, [(i, i + 1) for i in range(1, n)] + [(1, n)])


def random_graph(n, p, stream):
    u = uniform_block(Seed(42, stream), 0, n * (n - 1) // 2)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    return build_graph(n, [pr for pr, x in zip(pairs, u) if x < p])


# -- construction ---------------------------------------------------------------


def test_build_graph_dedups_symmetric_pair():
    g = build_graph(4, [(1, 2), (2, 1), (3, 4)])
    assert g.edges() == [(1, 2), (3, 4)]
    assert list(g.degrees) == [1, 1, 1, 1]


def test_build_graph_empty():
    g = build_graph(2, [])
    assert g.edges() == []
    assert list(g.degrees) == [0, 0]


def test_build_graph_out_of_range():
    with pytest.raises(GraphError, match="out of range"):
        build_graph(4, [(1, 5)])


def test_build_graph_self_loop():
    with pytest.raises(GraphError, match="self-loop"):
        build_graph(4, [(2, 2)])


def test_build_graph_small_n():
    with pytest.raises(GraphError):
        build_graph(1, [])


def test_edges_sorted_canonical():
    g = build_graph(5, [(5, 3), (2, 1), (4, 1)])
    assert g.edges() == [(1, 2), (1, 4), (3, 5)]


def test_neighbors_and_has_edge():
    g = build_graph(4, [(1, 2), (1, 3)])
    assert g.neighbors(1) == [2, 3]
    assert g.neighbors(4) == []
    assert g.has_edge(3, 1) and not g.has_edge(2, 3)


def test_graph_from_adjacency_matches_build():
    g = complete_graph(4)
    g2 = graph_from_adjacency(g.csr.toarray())
    assert np.array_equal(g.edge_array, g2.edge_array)
    g3 = graph_from_adjacency(g.csr)
    assert np.array_equal(g.edge_array, g3.edge_array)


def test_graph_from_adjacency_rejects_asymmetric():
    a = np.zeros((3, 3))
    a[0, 1] = 1
    with pytest.raises(GraphError, match="symmetric"):
        graph_from_adjacency(a)


# -- matrices -------------------------------------------------------------------


def test_k4_laplacian_spectrum():
    op = matrix(complete_graph(4), MatrixKind.UNNORMALIZED_LAPLACIAN)
    vals = np.linalg.eigvalsh(op.dense())
    assert np.allclose(vals, [0, 4, 4, 4], atol=1e-9)


def test_path3_laplacian_spectrum():
    op = matrix(path_graph(3), MatrixKind.UNNORMALIZED_LAPLACIAN)
    vals = np.linalg.eigvalsh(op.dense())
    assert np.allclose(vals, [0, 1, 3], atol=1e-9)


def test_cycle4_sym_normalized_spectrum():
    op = matrix(cycle_graph(4), MatrixKind.SYM_NORMALIZED_LAPLACIAN)
    vals = np.linalg.eigvalsh(op.dense())
    assert np.allclose(vals, [0, 1, 1, 2], atol=1e-9)


def test_isolated_vertex_rejected_for_normalized():
    g = build_graph(3, [(1, 2)])
    with pytest.raises(IsolatedVertexError) as err:
        matrix(g, MatrixKind.SYM_NORMALIZED_LAPLACIAN)
    assert err.value.vertex == 3
    # legal for the unnormalized kinds
    matrix(g, MatrixKind.UNNORMALIZED_LAPLACIAN).dense()
    matrix(g, MatrixKind.ADJACENCY).dense()


def test_dense_cap_enforced():
    g = path_graph(20)
    op = matrix(g, MatrixKind.ADJACENCY, dense_cap=10)
    with pytest.raises(DenseCapError):
        op.dense()
    x = np.ones(20)
    assert op.apply(x).shape == (20,)


def test_quadratic_form_identity():
    # x' L x == sum over edges of (x_u - x_v)^2
    for stream in range(5):
        g = random_graph(24, 0.3, stream)
        op = matrix(g, MatrixKind.UNNORMALIZED_LAPLACIAN)
        x = uniform_block(Seed(7, stream), 0, 24) - 0.5
        quad = float(x @ op.apply(x))
        direct = sum((x[u] - x[v]) ** 2 for u, v in g.edge_array)
        assert abs(quad - direct) <= 1e-9


def test_laplacian_row_sums_and_psd():
    g = random_graph(30, 0.2, 11)
    lap = matrix(g, MatrixKind.UNNORMALIZED_LAPLACIAN).dense()
    assert np.abs(lap.sum(axis=1)).max() < 1e-12
    assert np.linalg.eigvalsh(lap).min() >= -1e-9


@pytest.mark.parametrize("kind", [
    MatrixKind.ADJACENCY,
    MatrixKind.UNNORMALIZED_LAPLACIAN,
    MatrixKind.SYM_NORMALIZED_LAPLACIAN,
])
def test_dense_and_apply_agree_on_probes(kind):
    g = random_graph(40, 0.4, 3)
    op = matrix(g, kind)
    dense = op.dense()
    for i in range(20):
        x = uniform_block(Seed(1, i), 0, 40) - 0.5
        assert np.abs(op.apply(x) - dense @ x).max() <= 1e-10


@pytest.mark.parametrize("kind", [
    MatrixKind.ADJACENCY,
    MatrixKind.UNNORMALIZED_LAPLACIAN,
    MatrixKind.SYM_NORMALIZED_LAPLACIAN,
])
def test_symmetry_on_random_probes(kind):
    g = random_graph(32, 0.35, 8)
    op = matrix(g, kind)
    assert op.symmetric
    for i in range(10):
        x = uniform_block(Seed(2, 2 * i), 0, 32) - 0.5
        y = uniform_block(Seed(2, 2 * i + 1), 0, 32) - 0.5
        assert abs(x @ op.apply(y) - y @ op.apply(x)) <= 1e-10


def test_rw_kind_flagged_nonsymmetric():
    g = random_graph(16, 0.6, 9)
    op = matrix(g, MatrixKind.RW_NORMALIZED_LAPLACIAN)
    assert not op.symmetric
    # similarity: D^{1/2} L_rw D^{-1/2} equals L_sym
    d = np.sqrt(g.degrees.astype(float))
    sym = matrix(g, MatrixKind.SYM_NORMALIZED_LAPLACIAN).dense()
    rw = op.dense()
    assert np.abs(np.diag(d) @ rw @ np.diag(1 / d) - sym).max() < 1e-12


def test_operators_share_graph_storage():
    g = random_graph(16, 0.5, 4)
    a1 = matrix(g, MatrixKind.ADJACENCY)
    a2 = matrix(g, MatrixKind.UNNORMALIZED_LAPLACIAN)
    assert a1.sparse() is g.csr or (a1.sparse() != g.csr).nnz == 0
    assert a2.n == g.n


# -- degree split ----------------------------------------------------------------


def test_degree_split_k4():
    d_in, d_out = degree_split(complete_graph(4), [0, 0, 1, 1])
    assert list(d_in) == [1, 1, 1, 1]
    assert list(d_out) == [2, 2, 2, 2]


def test_degree_split_disjoint_edges():
    g = build_graph(4, [(1, 2), (3, 4)])
    d_in, d_out = degree_split(g, [0, 0, 1, 1])
    assert list(d_in) == [1, 1, 1, 1]
    assert list(d_out) == [0, 0, 0, 0]


def test_degree_split_single_crossing_edge():
    g = build_graph(4, [(1, 3)])
    d_in, d_out = degree_split(g, [0, 0, 1, 1])
    assert list(d_in) == [0, 0, 0, 0]
    assert list(d_out) == [1, 0, 1, 0]


def test_degree_split_sums():
    g = random_graph(20, 0.4, 17)
    labels = np.array([0] * 10 + [1] * 10)
    d_in, d_out = degree_split(g, labels)
    assert np.array_equal(d_in + d_out, g.degrees)
    crossing = sum(1 for u, v in g.edge_array if labels[u] != labels[v])
    assert d_out.sum() == 2 * crossing
    assert d_in.sum() == 2 * (g.num_edges - crossing)


def test_degree_split_validates():
    g = complete_graph(4)
    with pytest.raises(GraphError):
        degree_split(g, [0, 0, 1])          # wrong length
    with pytest.raises(GraphError):
        degree_split(g, [0, 0, 0, 1])       # unbalanced


# -- file formats -----------------------------------------------------------------


def test_edge_list_round_trip_bit_exact(tmp_path):
    g = build_graph(5, [(2, 1), (3, 5), (1, 4)])
    path = tmp_path / "g.el"
    write_edge_list(g, path)
    raw = path.read_bytes()
    assert raw == b"5 3\n1 2\n1 4\n3 5\n"
    g2 = read_edge_list(path)
    assert np.array_equal(g.edge_array, g2.edge_array)


def test_edge_list_header_mismatch(tmp_path):
    path = tmp_path / "bad.el"
    path.write_text("4 2\n1 2\n")
    with pytest.raises(GraphError, match="header"):
        read_edge_list(path)


def test_partition_round_trip(tmp_path):
    labels = np.array([0, 1, 1, 0], dtype=np.int8)
    path = tmp_path / "p.txt"
    write_partition(labels, path)
    assert path.read_bytes() == b"0\n1\n1\n0\n"
    assert np.array_equal(read_partition(path), labels)


def test_partition_rejects_other_tokens(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("0\n2\n")
    with pytest.raises(GraphError):
        read_partition(path)
