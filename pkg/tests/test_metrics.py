import numpy as np
import pytest

from semispec.metrics import (
    agreement,
    eigvec_distance,
    embedding_variance,
    ideal_second_eigenvector,
    misclassification,
)


def test_agreement_identical_and_flipped():
    labels = np.array([0, 1, 0, 1, 1, 0])
    assert agreement(labels, labels) == 1.0
    assert agreement(1 - labels, labels) == 1.0


def test_agreement_one_mismatch():
    assert agreement([0, 0, 1, 1], [0, 1, 1, 1]) == 0.75


def test_agreement_symmetric_and_flip_invariant():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rng.integers(0, 2, size=12)
        b = rng.integers(0, 2, size=12)
        assert agreement(a, b) == agreement(b, a)
        assert agreement(a, b) == agreement(1 - a, b) == agreement(a, 1 - b)
        assert agreement(a, b) >= 0.5
        assert misclassification(a, b) + agreement(a, b) == 1.0


def test_agreement_length_mismatch():
    with pytest.raises(ValueError):
        agreement([0, 1], [0, 1, 1])


def test_ideal_vector_orientation():
    star = ideal_second_eigenvector([0, 0, 1, 1])
    assert np.allclose(star, [0.5, 0.5, -0.5, -0.5])


def test_embedding_variance_zero_at_ideal_both_signs():
    planted = [0, 0, 1, 1]
    star = ideal_second_eigenvector(planted)
    assert embedding_variance(star, planted) == pytest.approx(0.0, abs=1e-15)
    assert embedding_variance(-star, planted) == pytest.approx(0.0, abs=1e-15)


def test_embedding_variance_orthogonal_case():
    u2 = np.array([1, -1, 1, -1]) / 2.0
    assert embedding_variance(u2, [0, 0, 1, 1]) == pytest.approx(0.5)


def test_embedding_variance_validates():
    with pytest.raises(ValueError):
        embedding_variance(np.array([1.0, 1.0]), [0, 1])  # not unit
    with pytest.raises(ValueError):
        embedding_variance(np.array([1.0, 0.0, 0.0]), [0, 1, 1])  # unbalanced


def test_embedding_variance_is_l2_distance_squared_over_n():
    rng = np.random.default_rng(7)
    for _ in range(10):
        planted = np.array([0] * 8 + [1] * 8)
        rng.shuffle(planted)
        u2 = rng.normal(size=16)
        u2 /= np.linalg.norm(u2)
        star = ideal_second_eigenvector(planted)
        l2, _ = eigvec_distance(u2, star)
        assert embedding_variance(u2, planted) == pytest.approx(l2 ** 2 / 16)


def test_eigvec_distance_cases():
    u = np.array([0.6, 0.8])
    assert eigvec_distance(u, u) == (0.0, 0.0)
    assert eigvec_distance(u, -u) == (0.0, 0.0)
    v = np.array([-0.8, 0.6])
    l2, linf = eigvec_distance(u, v)
    assert l2 == pytest.approx(np.sqrt(2))
    assert linf <= l2


def test_eigvec_distance_sign_from_l2_criterion():
    u = np.array([1.0, 0.0, 0.0])
    v = np.array([0.8, 0.6, 0.0])
    l2, linf = eigvec_distance(u, v)
    assert l2 == pytest.approx(np.linalg.norm(u - v))
    assert linf == pytest.approx(np.abs(u - v).max())


def test_eigvec_distance_validates():
    with pytest.raises(ValueError):
        eigvec_distance(np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        eigvec_distance(np.array([2.0, 0.0]), np.array([1.0, 0.0]))


def test_score_aggregates_consistently():
    from semispec.metrics import score

    planted = [0, 0, 1, 1]
    star = ideal_second_eigenvector(planted)
    s = score(star, [0, 0, 1, 1], planted)
    assert s.agreement == 1.0
    assert s.misclassification == 0.0
    assert s.embedding_variance == pytest.approx(0.0, abs=1e-15)
    assert s.l2_dist == 0.0 and s.linf_dist == 0.0
    assert s.embedding_variance == pytest.approx(s.l2_dist ** 2 / 4)
