"""Closed-form expectations, thresholds, spectra, and certificates.

Everything here is computable from model parameters or a single sampled
graph: expected Laplacians and their planted eigenpair, the four
threshold formulas, condition margins with unit constants, the two-sided
eigenvector perturbation bound, the per-vertex recovery certificate, and
empirical concentration diagnostics.  Unspecified universal constants
default to 1 and are overridable where they appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .eigen import EigenResult
from .graph import Graph, SymmetricOperator, check_partition, degree_split, matrix, MatrixKind
from .metrics import ideal_second_eigenvector
from .models import BlockProbabilitySpec, SpecError

EXPECTED_DENSE_CAP = 4096


def _dense_operator(m: np.ndarray, dense_cap: int = EXPECTED_DENSE_CAP) -> SymmetricOperator:
    m = np.asarray(m, dtype=float)
    return SymmetricOperator(
        m.shape[0],
        lambda x: m @ x,
        lambda: m,
        lambda: sp.csr_matrix(m),
        symmetric=True,
        dense_cap=dense_cap,
    )


def expected_adjacency(spec: BlockProbabilitySpec) -> np.ndarray:
    """E[A] as a dense matrix: block probabilities, plants at 1, zero diagonal."""
    if spec.n > EXPECTED_DENSE_CAP:
        raise SpecError(f"expected matrices are capped at n <= {EXPECTED_DENSE_CAP}")
    blocks = spec.block_of(np.arange(spec.n))
    a = spec.prob[np.ix_(blocks, blocks)].copy()
    np.fill_diagonal(a, 0.0)
    for u, v in spec.forced_pairs:
        a[u, v] = a[v, u] = 1.0
    return a


def expected_laplacian(spec: BlockProbabilitySpec) -> SymmetricOperator:
    """E[L] with self-loop probabilities excluded (p_vv treated as 0)."""
    a = expected_adjacency(spec)
    lap = np.diag(a.sum(axis=1)) - a
    return _dense_operator(lap)


def dcm_expected_laplacian(internal_1: Graph, internal_2: Graph, q: float) -> SymmetricOperator:
    """Expected Laplacian of a deterministic-clusters draw before the
    adaptive step: L(internal union) + q * L(complete bipartite)."""
    if internal_1.n != internal_2.n:
        raise SpecError(
            f"internal graphs must have equal sizes, got {internal_1.n} and {internal_2.n}"
        )
    h = internal_1.n
    n = 2 * h
    if n > EXPECTED_DENSE_CAP:
        raise SpecError(f"expected matrices are capped at n <= {EXPECTED_DENSE_CAP}")
    a = np.zeros((n, n))
    a[:h, :h] = internal_1.csr.toarray()
    a[h:, h:] = internal_2.csr.toarray()
    lap = np.diag(a.sum(axis=1)) - a
    lap[:h, h:] -= q
    lap[h:, :h] -= q
    lap[np.diag_indices(n)] += q * h
    return _dense_operator(lap)


# -- thresholds ----------------------------------------------------------------


@dataclass(frozen=True)
class NestedBlockSpectrum:
    """Nonzero eigenvalues of the self-loop-weighted expected normalized
    operator of the nested-block instance, with the R-side eigenvector
    levels y_plus / y_minus and the closed-form gap lower bound."""

    lambda1: float
    lambda2: float
    lambda3: float
    y_plus: float
    y_minus: float
    gap_lower_bound: float


def nested_block_expected_spectrum(p: float, q: float, K: float) -> NestedBlockSpectrum:
    if not q < p:
        raise SpecError(f"need q < p, got q={q}, p={p}")
    if not K > 1:
        raise SpecError(f"need K > 1, got K={K}")
    if K * p > 1:
        raise SpecError(f"K*p = {K * p} exceeds 1")
    lam2 = (K - 1) * p / (2 * (p * (K + 1) / 2 + q))
    lam3 = -1 + p * (1 / (p + q) + (K + 1) / (p * (K + 1) + 2 * q))
    y_plus = math.sqrt(2 * (p + q) / (p * (K + 1) + 2 * q))
    y_minus = -1.0 / y_plus
    num = p * p * (K + 3) + 4 * p * q
    gap_lb = 1 - num / (num + 2 * q * q)
    return NestedBlockSpectrum(1.0, lam2, lam3, y_plus, y_minus, gap_lb)


def nested_block_normalized_operator(n: int, p: float, q: float, K: float) -> np.ndarray:
    """The explicit I - (expected normalized Laplacian) block matrix, with
    the weighted self-loops kept in the degrees."""
    if n % 4:
        raise SpecError(f"n must be divisible by 4, got {n}")
    quarter = n // 4
    d_left = (n / 2) * (p * (K + 1) / 2 + q)
    d_right = (n / 2) * (p + q)
    m = np.empty((n, n))
    half = n // 2
    m[:half, :half] = p / d_left
    m[:quarter, :quarter] = K * p / d_left
    m[quarter:half, quarter:half] = K * p / d_left
    m[:half, half:] = q / math.sqrt(d_left * d_right)
    m[half:, :half] = q / math.sqrt(d_left * d_right)
    m[half:, half:] = p / d_right
    return m


@dataclass(frozen=True)
class TheoryReport:
    """Every closed-form threshold and condition margin for one parameter
    point, with all universal constants set to 1 unless overridden."""

    n: int
    p: float
    pbar: float
    q: float
    K: Optional[float]
    alpha: float
    pbar_max: float
    pbar_thr: float
    p_thr: float
    p_info: float
    recovery_gap_lhs: float
    recovery_gap_rhs: float
    recovery_gap_margin: float
    dcm_din_bound: float
    dcm_din_margin: float
    dcm_gap_bound: float
    dcm_gap_margin: float
    dk_bound: float
    nested: Optional[NestedBlockSpectrum] = None

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "p": self.p,
            "pbar": self.pbar,
            "q": self.q,
            "K": self.K,
            "alpha": self.alpha,
            "pbar_max": self.pbar_max,
            "pbar_thr": self.pbar_thr,
            "p_thr": self.p_thr,
            "p_info": self.p_info,
            "recovery_gap_lhs": self.recovery_gap_lhs,
            "recovery_gap_rhs": self.recovery_gap_rhs,
            "recovery_gap_margin": self.recovery_gap_margin,
            "dcm_din_bound": self.dcm_din_bound,
            "dcm_din_margin": self.dcm_din_margin,
            "dcm_gap_bound": self.dcm_gap_bound,
            "dcm_gap_margin": self.dcm_gap_margin,
            "dk_bound": self.dk_bound,
        }
        if self.nested is not None:
            out.update({
                "nested_lambda1": self.nested.lambda1,
                "nested_lambda2": self.nested.lambda2,
                "nested_lambda3": self.nested.lambda3,
                "nested_y_plus": self.nested.y_plus,
                "nested_y_minus": self.nested.y_minus,
                "nested_gap_lower_bound": self.nested.gap_lower_bound,
            })
        return out


def thresholds(
    n: int,
    p: float,
    pbar: float,
    q: float,
    K: Optional[float] = None,
    c_recovery_gap: float = 1.0,
    c_dcm_din: float = 1.0,
    c_dcm_nq: float = 1.0,
    c_dcm_conc: float = 1.0,
) -> TheoryReport:
    """Evaluate every closed-form threshold at (n, p, pbar, q[, K]).

    Requires 0 <= q < p <= pbar <= 1.  With q = 0 the normalized-failure
    threshold 3 p^2 / q is reported as +inf.
    """
    if not (0 <= q < p <= pbar <= 1):
        raise SpecError(
            f"need 0 <= q < p <= pbar <= 1, got q={q}, p={p}, pbar={pbar}"
        )
    logn = math.log(n)
    alpha = pbar / (p - q)
    pbar_max = (n * (p - q) - logn) ** 2 / (n * logn)
    pbar_thr = 3 * p * p / q if q > 0 else float("inf")
    p_thr = math.sqrt(pbar * logn / n) + q
    p_info = (math.sqrt(2.0) * math.sqrt(logn / n) + math.sqrt(q)) ** 2

    gap_lhs = n * (p - q)
    gap_rhs = c_recovery_gap * (math.sqrt(n * pbar * logn) + logn)

    din_bound = c_dcm_din * (n * q + math.sqrt(n))
    gap_bound = math.sqrt(n) + c_dcm_nq * n * q + c_dcm_conc * (
        math.sqrt(n * q * logn) + logn
    )
    # margins instantiated at the homogeneous expectations: internal degree
    # n p / 2, expected-Laplacian gap n (p - q) / 2
    din_margin = n * p / 2 - din_bound
    gap_margin = n * (p - q) / 2 - gap_bound

    # a-priori eigenvector error estimate: perturbation norm shape over the
    # expected spectral-gap shape, at failure probability 1/n, constant 1
    dk_num = math.sqrt(n * q) + (2 * n * q * logn) ** 0.25 + math.sqrt(2 * logn)
    dk_den = n * (p - q) / 2 - (math.sqrt(2 * n * pbar * logn) + 2 * logn)
    dk_bound = math.sqrt(2.0) * dk_num / dk_den if dk_den > 0 else float("inf")

    nested = None
    if K is not None:
        nested = nested_block_expected_spectrum(p, q, K)

    return TheoryReport(
        n=n, p=p, pbar=pbar, q=q, K=K,
        alpha=alpha,
        pbar_max=pbar_max, pbar_thr=pbar_thr, p_thr=p_thr, p_info=p_info,
        recovery_gap_lhs=gap_lhs, recovery_gap_rhs=gap_rhs, recovery_gap_margin=gap_lhs - gap_rhs,
        dcm_din_bound=din_bound, dcm_din_margin=din_margin,
        dcm_gap_bound=gap_bound, dcm_gap_margin=gap_margin,
        dk_bound=dk_bound,
        nested=nested,
    )


# -- Davis-Kahan ---------------------------------------------------------------


def davis_kahan_bound(lap: SymmetricOperator, lap_hat: SymmetricOperator) -> float:
    """Two-sided perturbation bound on the second eigenvectors of two
    Laplacian-like matrices, computed from their dense spectra.

    Returns +inf if both admissible denominators vanish (degenerate
    spectra with lap == lap_hat).
    """
    if lap.n != lap_hat.n:
        raise ValueError(f"dimension mismatch: {lap.n} vs {lap_hat.n}")
    if lap.n < 3:
        raise ValueError("need n >= 3 for a third eigenvalue")
    a = lap.dense()
    b = lap_hat.dense()
    vals_a, vecs_a = np.linalg.eigh(a)
    vals_b, vecs_b = np.linalg.eigh(b)
    diff = b - a
    candidates = []
    num1 = np.linalg.norm(diff @ vecs_a[:, 1])
    den1 = abs(vals_b[2] - vals_a[1])
    if den1 > 1e-12:
        candidates.append(num1 / den1)
    num2 = np.linalg.norm(diff @ vecs_b[:, 1])
    den2 = abs(vals_a[2] - vals_b[1])
    if den2 > 1e-12:
        candidates.append(num2 / den2)
    if not candidates:
        return float("inf")
    return math.sqrt(2.0) * min(candidates)


# -- strong-consistency certificate ---------------------------------------------


@dataclass
class ConsistencyCertificate:
    """Per-vertex evaluation of the three sufficient recovery conditions."""

    degree_gap: float                 # min_w d[w] - lambda2
    cond_degree_gap: bool             # degree_gap > 0 (global)
    cond_balance: np.ndarray          # d_in[v] > d_out[v]
    cond_alignment: np.ndarray        # |<a_v, u2* - u2>| <= (d_in - d_out)/sqrt(n)
    alignment_lhs: np.ndarray
    alignment_rhs: np.ndarray
    per_vertex: np.ndarray = field(init=False)
    overall: bool = field(init=False)

    def __post_init__(self):
        self.per_vertex = self.cond_degree_gap & self.cond_balance & self.cond_alignment
        self.overall = bool(self.per_vertex.all())


def consistency_certificate(
    g: Graph, planted: np.ndarray, eig: EigenResult
) -> ConsistencyCertificate:
    """Evaluate the per-vertex recovery conditions for the unnormalized
    Laplacian's second eigenpair, with u2 sign-aligned to the ideal."""
    labels = check_partition(planted, g.n)
    lam2 = eig.value(2)
    u2 = eig.vector(2)
    star = ideal_second_eigenvector(labels)
    if float(u2 @ star) < 0:
        u2 = -u2
    d = g.degrees.astype(float)
    d_in, d_out = degree_split(g, labels)
    degree_gap = float((d - lam2).min())
    lhs = np.abs(g.csr @ (star - u2))
    rhs = (d_in - d_out) / math.sqrt(g.n)
    return ConsistencyCertificate(
        degree_gap=degree_gap,
        cond_degree_gap=degree_gap > 0,
        cond_balance=d_in > d_out,
        cond_alignment=lhs <= rhs,
        alignment_lhs=lhs,
        alignment_rhs=rhs,
    )


# -- concentration diagnostics ---------------------------------------------------


@dataclass(frozen=True)
class ConcentrationReport:
    """Observed degree/Laplacian deviations next to their bound shapes
    sqrt(n * rate * ln n) + ln n with constant 1."""

    max_dout_dev: float
    dout_bound: float
    max_din_dev: float
    din_bound: float
    laplacian_dev: Optional[float]
    laplacian_bound: float


def _expected_degree_split(spec: BlockProbabilitySpec) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.diff(spec.bounds).astype(float)
    same_side = spec.block_side[:, None] == spec.block_side[None, :]
    # per block: sum over blocks of prob * size, minus the self pair
    contrib = spec.prob * sizes[None, :]
    e_in_block = (contrib * same_side).sum(axis=1) - np.diag(spec.prob)
    e_out_block = (contrib * ~same_side).sum(axis=1)
    blocks = spec.block_of(np.arange(spec.n))
    e_in = e_in_block[blocks]
    e_out = e_out_block[blocks].copy()
    e_in = e_in.copy()
    for u, v in spec.forced_pairs:
        bump = 1.0 - spec.prob[int(spec.block_of(u)), int(spec.block_of(v))]
        e_in[u] += bump
        e_in[v] += bump
    return e_in, e_out


def concentration_diagnostics(g: Graph, spec: BlockProbabilitySpec) -> ConcentrationReport:
    """Compare sampled degrees (and, for n <= 512, the Laplacian) against
    their expectations under ``spec``."""
    if g.n != spec.n:
        raise SpecError(f"graph has n = {g.n} but spec has n = {spec.n}")
    logn = math.log(g.n)
    labels = spec.labels
    d_in, d_out = degree_split(g, labels)
    e_in, e_out = _expected_degree_split(spec)

    sides = spec.block_side
    internal = sides[:, None] == sides[None, :]
    q_rate = float(spec.prob[~internal].max()) if (~internal).any() else 0.0
    p_rate = float(spec.prob[internal].max())
    nonfull = spec.prob[spec.prob < 1.0]
    lap_rate = float(nonfull.max()) if nonfull.size else 0.0

    def bound(rate: float) -> float:
        return math.sqrt(g.n * rate * logn) + logn

    lap_dev = None
    if g.n <= 512:
        lap = matrix(g, MatrixKind.UNNORMALIZED_LAPLACIAN).dense()
        lap_star = expected_laplacian(spec).dense()
        lap_dev = float(np.abs(np.linalg.eigvalsh(lap - lap_star)).max())

    return ConcentrationReport(
        max_dout_dev=float(np.abs(d_out - e_out).max()),
        dout_bound=bound(q_rate),
        max_din_dev=float(np.abs(d_in - e_in).max()),
        din_bound=bound(p_rate),
        laplacian_dev=lap_dev,
        laplacian_bound=bound(lap_rate),
    )
