import math

import numpy as np
import pytest

from semispec.graph import build_graph
from semispec.models import (
    BlockProbabilitySpec,
    DcmSpec,
    SpecError,
    apply_deterministic_plant,
    erdos_renyi,
    nested_block_spec,
    nested_hypothesis_ok,
    nssbm_benchmark_spec,
    planted_clique_internal,
    sample_block_model,
    sample_dcm,
    ssbm_spec,
)
from semispec.streams import Seed


def edge_set(g):
    return set(map(tuple, g.edge_array))


# -- spec construction and validity -----------------------------------------------


def test_spec_rejects_bad_blocks():
    with pytest.raises(SpecError):
        BlockProbabilitySpec(4, [0, 3, 4], [[0.5, 0.1], [0.1, 0.5]], [0, 1])  # unequal sides
    with pytest.raises(SpecError):
        BlockProbabilitySpec(4, [0, 2, 3], [[0.5, 0.1], [0.1, 0.5]], [0, 1])  # not covering
    with pytest.raises(SpecError):
        BlockProbabilitySpec(4, [0, 2, 4], [[0.5, 0.1], [0.2, 0.5]], [0, 1])  # asymmetric
    with pytest.raises(SpecError):
        BlockProbabilitySpec(4, [0, 2, 4], [[1.5, 0.1], [0.1, 0.5]], [0, 1])  # prob > 1


def test_ssbm_spec_labels_and_probs():
    spec = ssbm_spec(6, 0.7, 0.2)
    assert list(spec.labels) == [0, 0, 0, 1, 1, 1]
    assert spec.pair_probability(1, 2) == 0.7
    assert spec.pair_probability(1, 5) == 0.2
    v = spec.nssbm_validity()
    assert v.valid and v.p == 0.7 and v.pbar == 0.7 and v.q == 0.2


def test_benchmark_spec_prob_table():
    spec = nssbm_benchmark_spec(8, 0.2, 0.6, 0.1)
    assert np.allclose(spec.prob, [[0.6, 0.2, 0.1], [0.2, 0.6, 0.1], [0.1, 0.1, 0.2]])
    assert list(spec.labels) == [0, 0, 0, 0, 1, 1, 1, 1]
    v = spec.nssbm_validity()
    assert v.valid and v.p == 0.2 and v.pbar == 0.6 and v.q == 0.1


def test_benchmark_spec_degenerate_ssbm_member():
    spec = nssbm_benchmark_spec(8, 0.3, 0.3, 0.1)
    assert spec.nssbm_validity().valid
    full = spec.dense_probability_matrix()
    ref = ssbm_spec(8, 0.3, 0.1).dense_probability_matrix()
    assert np.array_equal(full, ref)


def test_benchmark_spec_rejects_p_below_q():
    with pytest.raises(SpecError):
        nssbm_benchmark_spec(8, 0.05, 0.6, 0.1)


def test_nested_spec_values_and_bounds():
    spec = nested_block_spec(8, 0.1, 0.05, 6)
    assert spec.prob[0, 0] == pytest.approx(0.6)
    assert spec.prob[2, 2] == pytest.approx(0.1)
    with pytest.raises(SpecError):
        nested_block_spec(8, 0.2, 0.1, 6)  # K p = 1.2


def test_nested_hypothesis_flag():
    assert nested_hypothesis_ok(0.1, 0.05, 6)        # K = 6 >= 3 p / q = 6
    assert not nested_hypothesis_ok(0.1, 0.05, 5.9)
    assert not nested_hypothesis_ok(0.05, 0.1, 100)  # q >= p


# -- block-model sampling ----------------------------------------------------------


def test_prob_one_gives_complete_graph():
    spec = ssbm_spec(4, 1.0, 1.0)
    g = sample_block_model(spec, Seed(0))
    assert g.num_edges == 6


def test_prob_zero_gives_empty_graph():
    g = sample_block_model(ssbm_spec(6, 0.0, 0.0), Seed(0))
    assert g.num_edges == 0


def test_sampling_deterministic():
    spec = nssbm_benchmark_spec(40, 0.3, 0.7, 0.1)
    a = sample_block_model(spec, Seed(5, 17))
    b = sample_block_model(spec, Seed(5, 17))
    assert np.array_equal(a.edge_array, b.edge_array)
    c = sample_block_model(spec, Seed(5, 18))
    assert not np.array_equal(a.edge_array, c.edge_array)


def test_ssbm_edge_count_means():
    # internal mean 2 C(50,2) 0.5 = 1225, crossing mean 2500 * 0.1 = 250
    spec = ssbm_spec(100, 0.5, 0.1)
    labels = spec.labels
    internal, crossing = [], []
    for s in range(200):
        g = sample_block_model(spec, Seed(1234, s))
        same = labels[g.edge_array[:, 0]] == labels[g.edge_array[:, 1]]
        internal.append(int(same.sum()))
        crossing.append(int((~same).sum()))
    var_int = 2 * math.comb(50, 2) * 0.25
    var_cross = 2500 * 0.1 * 0.9
    assert abs(np.mean(internal) - 1225) <= 4 * math.sqrt(var_int / 200)
    assert abs(np.mean(crossing) - 250) <= 4 * math.sqrt(var_cross / 200)


def test_per_pair_frequency_matches_probability():
    spec = nssbm_benchmark_spec(8, 0.2, 0.6, 0.1)
    probs = spec.dense_probability_matrix()
    counts = np.zeros((8, 8))
    trials = 2000
    for s in range(trials):
        g = sample_block_model(spec, Seed(777, s))
        for u, v in g.edge_array:
            counts[u, v] += 1
    iu, iv = np.triu_indices(8, k=1)
    freq = counts[iu, iv] / trials
    p = probs[iu, iv]
    sigma = np.sqrt(p * (1 - p) / trials)
    assert np.all(np.abs(freq - p) <= 5 * np.maximum(sigma, 1e-12))


# -- deterministic plants ----------------------------------------------------------


def test_plant_forces_edge_everywhere():
    with pytest.warns(UserWarning, match="budget"):
        spec = apply_deterministic_plant(ssbm_spec(20, 0.05, 0.01), [(1, 2)], force=True)
    assert spec.pair_probability(1, 2) == 1.0
    for s in range(20):
        g = sample_block_model(spec, Seed(3, s))
        assert (0, 1) in edge_set(g)


def test_plant_rejects_crossing_pair():
    with pytest.raises(SpecError, match="internal-only"):
        apply_deterministic_plant(ssbm_spec(8, 0.5, 0.1), [(1, 8)])


def test_plant_budget_enforced_and_forceable():
    spec = ssbm_spec(20, 0.05, 0.01)  # budget = 20 * 0.05 / loglog 20 tiny
    clique = [(i, j) for i in range(1, 6) for j in range(i + 1, 6)]
    with pytest.raises(SpecError, match="budget"):
        apply_deterministic_plant(spec, clique)
    with pytest.warns(UserWarning, match="forced"):
        planted = apply_deterministic_plant(spec, clique, force=True)
    for s in range(50):
        g = sample_block_model(planted, Seed(11, s))
        assert set(map(tuple, np.asarray(clique) - 1)) <= edge_set(g)


def test_plant_coupling_is_monotone():
    base = ssbm_spec(24, 0.3, 0.1)
    planted = apply_deterministic_plant(base, [(1, 2), (3, 4), (13, 14)], force=True)
    for s in range(30):
        g0 = sample_block_model(base, Seed(21, s))
        g1 = sample_block_model(planted, Seed(21, s))
        assert edge_set(g0) <= edge_set(g1)


def test_plant_keeps_u2star_eigenvector_status():
    # planted pairs are internal, so the validity check still reports q
    spec = apply_deterministic_plant(ssbm_spec(12, 0.4, 0.1), [(1, 2)], force=True)
    v = spec.nssbm_validity()
    assert v.valid and v.q == 0.1


# -- deterministic clusters model --------------------------------------------------


def two_cliques(h):
    pairs = [(i, j) for i in range(1, h + 1) for j in range(i + 1, h + 1)]
    return build_graph(h, pairs), build_graph(h, pairs)


def test_dcm_q_zero_is_disjoint_union():
    g1, g2 = two_cliques(3)
    g = sample_dcm(DcmSpec(6, g1, g2, 0.0), Seed(0))
    assert g.num_edges == 6
    assert all((u < 3) == (v < 3) for u, v in g.edge_array)


def test_dcm_q_one_has_all_crossing_edges():
    g1, g2 = two_cliques(3)
    g = sample_dcm(DcmSpec(6, g1, g2, 1.0), Seed(0))
    crossing = [(u, v) for u, v in g.edge_array if (u < 3) != (v < 3)]
    assert len(crossing) == 9


def test_dcm_crossing_count_binomial():
    g1, g2 = two_cliques(3)
    spec = DcmSpec(6, g1, g2, 0.2)
    counts = []
    for s in range(500):
        g = sample_dcm(spec, Seed(99, s))
        counts.append(g.num_edges - 6)
    mean = np.mean(counts)
    sigma = math.sqrt(9 * 0.2 * 0.8 / 500)
    assert abs(mean - 1.8) <= 4 * sigma


def test_dcm_declared_min_degree_checked():
    g1, g2 = two_cliques(3)
    DcmSpec(6, g1, g2, 0.5, d_in_declared=2)
    with pytest.raises(SpecError, match="minimum degree"):
        DcmSpec(6, g1, g2, 0.5, d_in_declared=3)


def test_dcm_adversary_adds_internal_edges_and_is_tagged():
    h = 4
    g1 = build_graph(h, [(1, 2), (2, 3), (3, 4), (1, 4)])
    g2 = build_graph(h, [(1, 2), (2, 3), (3, 4), (1, 4)])

    def adversary(g):
        return [(1, 3), (2, 4)]  # inside side 0

    g = sample_dcm(DcmSpec(8, g1, g2, 0.0, post_adversary=adversary), Seed(1))
    assert g.adversary_edges == 2
    assert (0, 2) in edge_set(g) and (1, 3) in edge_set(g)


def test_dcm_adversary_crossing_rejected():
    g1, g2 = two_cliques(3)

    def bad(g):
        return [(1, 5)]

    with pytest.raises(SpecError, match="crossing"):
        sample_dcm(DcmSpec(6, g1, g2, 0.0, post_adversary=bad), Seed(1))


# -- planted clique ----------------------------------------------------------------


def test_clique_size_equals_half_n_gives_complete():
    g = planted_clique_internal(6, 0.0, 6, Seed(0))
    assert g.num_edges == 15


def test_clique_zero_and_p_zero_gives_empty():
    g = planted_clique_internal(6, 0.0, 0, Seed(0))
    assert g.num_edges == 0


def test_clique_out_of_range():
    with pytest.raises(SpecError):
        planted_clique_internal(6, 0.1, 7, Seed(0))


def test_clique_vertices_have_forced_degree():
    # clique members are adjacent to all other members regardless of p
    half_n, size = 1000, 400
    p = 9 / math.sqrt(2000)
    for s in range(10):
        g = planted_clique_internal(half_n, p, size, Seed(13, s))
        assert g.degrees[:size].min() >= size - 1
        assert g.degrees.min() > 0


def test_erdos_renyi_mean_edges():
    counts = [erdos_renyi(50, 0.3, Seed(5, s)).num_edges for s in range(100)]
    mean = math.comb(50, 2) * 0.3
    sigma = math.sqrt(math.comb(50, 2) * 0.3 * 0.7 / 100)
    assert abs(np.mean(counts) - mean) <= 4 * sigma
