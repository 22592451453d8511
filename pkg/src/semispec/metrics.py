"""Scoring a recovered bipartition against the planted one."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import check_partition


def ideal_second_eigenvector(planted: np.ndarray) -> np.ndarray:
    """The ideal embedding: +1/sqrt(n) on side 0, -1/sqrt(n) on side 1."""
    labels = check_partition(planted)
    n = len(labels)
    return np.where(labels == 0, 1.0, -1.0) / np.sqrt(n)


def agreement(predicted: np.ndarray, planted: np.ndarray) -> float:
    """Fraction of correctly classified vertices, maximized over the two
    ways of identifying the unlabeled sides."""
    a = check_partition(predicted)
    b = check_partition(planted)
    if len(a) != len(b):
        raise ValueError(f"label vectors have different lengths: {len(a)} vs {len(b)}")
    matches = int(np.count_nonzero(a == b))
    # integer max first, so flipping either labeling gives the identical float
    return max(matches, len(a) - matches) / len(a)


def misclassification(predicted: np.ndarray, planted: np.ndarray) -> float:
    return 1.0 - agreement(predicted, planted)


def _check_unit(u: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    norm = np.linalg.norm(u)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"expected a unit vector, got norm {norm!r}")
    return u


def embedding_variance(u2: np.ndarray, planted: np.ndarray) -> float:
    """Average squared deviation of the embedding from its ideal, min over sign."""
    u2 = _check_unit(u2)
    labels = check_partition(planted, len(u2))
    if 2 * int(labels.sum()) != len(labels):
        raise ValueError("planted partition must be balanced")
    star = ideal_second_eigenvector(labels)
    n = len(u2)
    return min(
        float(np.sum((u2 - star) ** 2)) / n,
        float(np.sum((u2 + star) ** 2)) / n,
    )


def eigvec_distance(u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """(l2, linf) distance between unit vectors, sign chosen by the l2 criterion."""
    u = _check_unit(u)
    v = _check_unit(v)
    if len(u) != len(v):
        raise ValueError(f"vectors have different lengths: {len(u)} vs {len(v)}")
    s = 1.0 if float(u @ v) >= 0 else -1.0
    diff = u - s * v
    return float(np.linalg.norm(diff)), float(np.max(np.abs(diff)))


@dataclass(frozen=True)
class Score:
    """All trial statistics for one recovered bipartition."""

    agreement: float
    misclassification: float
    embedding_variance: float
    l2_dist: float
    linf_dist: float


def score(u2: np.ndarray, predicted: np.ndarray, planted: np.ndarray) -> Score:
    """Aggregate every metric of a cut and its embedding in one record."""
    agr = agreement(predicted, planted)
    var = embedding_variance(u2, planted)
    l2, linf = eigvec_distance(u2, ideal_second_eigenvector(planted))
    return Score(
        agreement=agr,
        misclassification=1.0 - agr,
        embedding_variance=var,
        l2_dist=l2,
        linf_dist=linf,
    )
