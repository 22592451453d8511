"""Samplers for the block-structured and adversarial graph distributions.

All sampling is keyed per vertex pair: the uniform deciding pair (u, v)
is a function of the seed and the pair's linear index only.  Sampling a
spec with and without a probability-1 plant under the same seed therefore
yields coupled graphs where the planted edge set is a superset.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .graph import Graph
from .streams import Seed, uniforms


class SpecError(ValueError):
    pass


def _pair_index(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """Linear index of 0-based pairs u < v in the upper triangle of n."""
    u = u.astype(np.int64)
    v = v.astype(np.int64)
    return (u * (2 * n - u - 1)) // 2 + (v - u - 1)


def _same_block_pairs(lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    iu, iv = np.triu_indices(hi - lo, k=1)
    return iu + lo, iv + lo


def _cross_block_pairs(lo1, hi1, lo2, hi2) -> tuple[np.ndarray, np.ndarray]:
    a = np.arange(lo1, hi1, dtype=np.int64)
    b = np.arange(lo2, hi2, dtype=np.int64)
    return np.repeat(a, len(b)), np.tile(b, len(a))


@dataclass(frozen=True)
class NssbmValidity:
    valid: bool
    p: float
    pbar: float
    q: float
    reason: str = ""


class BlockProbabilitySpec:
    """Edge probabilities given block-wise over contiguous vertex blocks.

    ``bounds`` are block offsets (0 = b_0 < ... < b_B = n), ``prob`` the
    symmetric B x B block probability table, ``block_side`` the {0,1}
    side assignment defining the planted bisection.  ``forced_pairs`` is
    an exception list of internal pairs whose probability is overridden
    to 1 (the deterministic-plant extension).
    """

    __slots__ = ("n", "bounds", "prob", "block_side", "forced_pairs")

    def __init__(self, n, bounds, prob, block_side, forced_pairs=None):
        self.n = int(n)
        self.bounds = np.asarray(bounds, dtype=np.int64)
        self.prob = np.asarray(prob, dtype=float)
        self.block_side = np.asarray(block_side, dtype=np.int8)
        fp = np.zeros((0, 2), dtype=np.int64) if forced_pairs is None else \
            np.asarray(forced_pairs, dtype=np.int64).reshape(-1, 2)
        self.forced_pairs = fp
        self._validate()
        for arr in (self.bounds, self.prob, self.block_side, self.forced_pairs):
            arr.flags.writeable = False

    def _validate(self) -> None:
        if self.n < 2 or self.n % 2:
            raise SpecError(f"n must be even and >= 2, got {self.n}")
        b = self.bounds
        if b[0] != 0 or b[-1] != self.n or np.any(np.diff(b) <= 0):
            raise SpecError("blocks must be contiguous, nonempty, and cover 1..n")
        nb = len(b) - 1
        if self.prob.shape != (nb, nb):
            raise SpecError(f"prob table must be {nb}x{nb}")
        if not np.allclose(self.prob, self.prob.T, rtol=0, atol=0):
            raise SpecError("prob table must be symmetric")
        if self.prob.min() < 0 or self.prob.max() > 1:
            raise SpecError("probabilities must lie in [0, 1]")
        if self.block_side.shape != (nb,) or not np.isin(self.block_side, (0, 1)).all():
            raise SpecError("block_side must assign each block to side 0 or 1")
        sizes = np.diff(b)
        if int(sizes[self.block_side == 0].sum()) != self.n // 2:
            raise SpecError("block sides must split 1..n into equal halves")
        fp = self.forced_pairs
        if fp.size:
            if fp.min() < 0 or fp.max() >= self.n or np.any(fp[:, 0] >= fp[:, 1]):
                raise SpecError("forced pairs must be canonical 0-based pairs u < v")
            lab = self.labels
            if np.any(lab[fp[:, 0]] != lab[fp[:, 1]]):
                raise SpecError("forced pairs must be internal to the planted partition")

    @property
    def num_blocks(self) -> int:
        return len(self.bounds) - 1

    @property
    def labels(self) -> np.ndarray:
        """Planted {0,1} labels, position i = vertex i + 1."""
        out = np.empty(self.n, dtype=np.int8)
        for i in range(self.num_blocks):
            out[self.bounds[i]:self.bounds[i + 1]] = self.block_side[i]
        return out

    def block_of(self, idx0: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.bounds, np.asarray(idx0), side="right") - 1

    def pair_probability(self, u: int, v: int) -> float:
        """Probability of the 1-based pair (u, v), honoring plants."""
        a, b = min(u, v) - 1, max(u, v) - 1
        if a == b:
            return 0.0
        if self.forced_pairs.size and np.any(
            (self.forced_pairs[:, 0] == a) & (self.forced_pairs[:, 1] == b)
        ):
            return 1.0
        return float(self.prob[int(self.block_of(a)), int(self.block_of(b))])

    def dense_probability_matrix(self) -> np.ndarray:
        """Full per-pair probability matrix (zero diagonal); n <= 512 only."""
        if self.n > 512:
            raise SpecError("dense probability matrix only supported for n <= 512")
        blocks = self.block_of(np.arange(self.n))
        m = self.prob[np.ix_(blocks, blocks)].copy()
        np.fill_diagonal(m, 0.0)
        for a, b in self.forced_pairs:
            m[a, b] = m[b, a] = 1.0
        return m

    def max_internal_probability(self) -> float:
        sides = self.block_side
        internal = sides[:, None] == sides[None, :]
        return float(self.prob[internal].max())

    def nssbm_validity(self) -> NssbmValidity:
        """Check membership in the nonhomogeneous family (block table only)."""
        sides = self.block_side
        internal = sides[:, None] == sides[None, :]
        p_lo = float(self.prob[internal].min())
        p_hi = float(self.prob[internal].max())
        cross = self.prob[~internal]
        if cross.size == 0:
            return NssbmValidity(False, p_lo, p_hi, float("nan"), "no crossing blocks")
        q = float(cross[0])
        if not np.all(cross == q):
            return NssbmValidity(False, p_lo, p_hi, q, "crossing probabilities differ")
        if not q < p_lo:
            return NssbmValidity(False, p_lo, p_hi, q, "requires q < p")
        return NssbmValidity(True, p_lo, p_hi, q)

    def with_forced_pairs(self, forced: np.ndarray) -> "BlockProbabilitySpec":
        return BlockProbabilitySpec(self.n, self.bounds, self.prob, self.block_side, forced)


def ssbm_spec(n: int, p: float, q: float) -> BlockProbabilitySpec:
    """SSBM(n, p, q): two equal blocks, internal p, crossing q."""
    return BlockProbabilitySpec(n, [0, n // 2, n], [[p, q], [q, p]], [0, 1])


def nssbm_benchmark_spec(n: int, p: float, pbar: float, q: float) -> BlockProbabilitySpec:
    """The benchmark distribution: subcommunities L1, L2 at rate pbar.

    Blocks L1 = 1..n/4, L2 = n/4+1..n/2, R = n/2+1..n; L1 and L2 are
    internally at pbar, L1-L2 and R-R at p, crossing at q; planted split
    is (L1 u L2 | R).
    """
    if n % 4:
        raise SpecError(f"n must be divisible by 4, got {n}")
    if not (q <= p <= pbar):
        raise SpecError(f"need q <= p <= pbar, got q={q}, p={p}, pbar={pbar}")
    prob = [[pbar, p, q], [p, pbar, q], [q, q, p]]
    return BlockProbabilitySpec(n, [0, n // 4, n // 2, n], prob, [0, 0, 1])


def nested_block_spec(n: int, p: float, q: float, K: float) -> BlockProbabilitySpec:
    """The nested-block inconsistency instance: L1, L2 internally at K*p."""
    if n % 4:
        raise SpecError(f"n must be divisible by 4, got {n}")
    if not q < p:
        raise SpecError(f"need q < p, got q={q}, p={p}")
    if K * p > 1:
        raise SpecError(f"K*p = {K * p} exceeds 1; not a probability")
    prob = [[K * p, p, q], [p, K * p, q], [q, q, p]]
    return BlockProbabilitySpec(n, [0, n // 4, n // 2, n], prob, [0, 0, 1])


def nested_hypothesis_ok(p: float, q: float, K: float) -> bool:
    """Whether (p, q, K) meets the inconsistency construction's hypothesis
    (q < p and K at least 3p/q, stated multiplicatively for float safety)."""
    return q < p and K * q >= 3 * p


def plant_budget(n: int, pbar: float) -> float:
    """Per-vertex cap on probability-1 plants: n * pbar / log log n (constant 1)."""
    if n <= 3:
        return 0.0
    loglog = math.log(math.log(n))
    return n * pbar / loglog if loglog > 0 else 0.0


def apply_deterministic_plant(
    spec: BlockProbabilitySpec,
    planted_edges: Sequence[tuple[int, int]],
    force: bool = False,
) -> BlockProbabilitySpec:
    """Override the listed internal 1-based pairs to probability 1.

    Enforces the per-vertex budget ``n * pbar / log log n`` unless
    ``force`` is set, in which case a warning is emitted instead.
    """
    pairs = np.asarray(list(planted_edges), dtype=np.int64).reshape(-1, 2)
    if pairs.size == 0:
        return spec
    if pairs.min() < 1 or pairs.max() > spec.n:
        raise SpecError(f"planted pair endpoint out of range 1..{spec.n}")
    if np.any(pairs[:, 0] == pairs[:, 1]):
        raise SpecError("planted pairs must not be self-loops")
    p0 = np.minimum(pairs[:, 0], pairs[:, 1]) - 1
    p1 = np.maximum(pairs[:, 0], pairs[:, 1]) - 1
    lab = spec.labels
    if np.any(lab[p0] != lab[p1]):
        bad = int(np.nonzero(lab[p0] != lab[p1])[0][0])
        raise SpecError(
            f"planted pair ({p0[bad] + 1}, {p1[bad] + 1}) crosses the planted partition; "
            "plants are internal-only"
        )
    forced = np.concatenate([spec.forced_pairs, np.stack([p0, p1], axis=1)])
    forced = np.unique(forced, axis=0)
    budget = plant_budget(spec.n, spec.max_internal_probability())
    per_vertex = np.bincount(forced.ravel(), minlength=spec.n)
    worst = int(per_vertex.max())
    if worst > budget:
        v = int(np.argmax(per_vertex)) + 1
        msg = (f"vertex {v} has {worst} planted edges, over the budget "
               f"{budget:.3g} = n*pbar/loglog(n)")
        if not force:
            raise SpecError(msg)
        warnings.warn(msg + " (forced)", stacklevel=2)
    return spec.with_forced_pairs(forced)


def sample_block_model(spec: BlockProbabilitySpec, seed: Seed) -> Graph:
    """One draw: pair (u, v) included independently with its spec probability."""
    us, vs = [], []
    b = spec.bounds
    for i in range(spec.num_blocks):
        for j in range(i, spec.num_blocks):
            pij = spec.prob[i, j]
            if pij <= 0.0:
                continue
            if i == j:
                u, v = _same_block_pairs(int(b[i]), int(b[i + 1]))
            else:
                u, v = _cross_block_pairs(int(b[i]), int(b[i + 1]), int(b[j]), int(b[j + 1]))
            if pij >= 1.0:
                keep = slice(None)
            else:
                draw = uniforms(seed, _pair_index(u, v, spec.n))
                keep = draw < pij
            us.append(u[keep])
            vs.append(v[keep])
    if spec.forced_pairs.size:
        us.append(spec.forced_pairs[:, 0])
        vs.append(spec.forced_pairs[:, 1])
    if us:
        return Graph.from_arrays(spec.n, np.concatenate(us), np.concatenate(vs))
    return Graph.from_arrays(spec.n, np.array([], dtype=np.int64), np.array([], dtype=np.int64))


# -- deterministic clusters model ---------------------------------------------


@dataclass(frozen=True)
class DcmSpec:
    """Adversarial internal graphs plus q-random crossing edges.

    ``post_adversary``, if given, receives the graph after the crossing
    edges are sampled and returns extra internal 1-based pairs to add.
    """

    n: int
    internal_1: Graph
    internal_2: Graph
    q: float
    d_in_declared: int = 0
    post_adversary: Optional[Callable[[Graph], Sequence[tuple[int, int]]]] = None

    def __post_init__(self):
        h = self.n // 2
        if self.n < 2 or self.n % 2:
            raise SpecError(f"n must be even and >= 2, got {self.n}")
        if self.internal_1.n != h or self.internal_2.n != h:
            raise SpecError("internal graphs must each live on n/2 vertices")
        if not 0 <= self.q <= 1:
            raise SpecError(f"q must be a probability, got {self.q}")
        for name, g in (("internal_1", self.internal_1), ("internal_2", self.internal_2)):
            mindeg = int(g.degrees.min()) if g.n else 0
            if mindeg < self.d_in_declared:
                raise SpecError(
                    f"{name} has minimum degree {mindeg} < declared d_in {self.d_in_declared}"
                )

    @property
    def labels(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.int8)
        out[self.n // 2:] = 1
        return out


def sample_dcm(spec: DcmSpec, seed: Seed) -> Graph:
    """Union of the fixed internal graphs, sampled crossing edges, and any
    adversary additions; the result is tagged with the adversary's edge count."""
    h = spec.n // 2
    parts_u = [spec.internal_1.edge_array[:, 0], spec.internal_2.edge_array[:, 0] + h]
    parts_v = [spec.internal_1.edge_array[:, 1], spec.internal_2.edge_array[:, 1] + h]
    if spec.q > 0:
        u, v = _cross_block_pairs(0, h, h, spec.n)
        if spec.q >= 1.0:
            keep = slice(None)
        else:
            # crossing pairs are counter-indexed within their own h*h grid
            draw = uniforms(seed, (u * h + (v - h)).astype(np.int64))
            keep = draw < spec.q
        parts_u.append(u[keep])
        parts_v.append(v[keep])
    g = Graph.from_arrays(spec.n, np.concatenate(parts_u), np.concatenate(parts_v))
    if spec.post_adversary is None:
        return g
    extra = np.asarray(list(spec.post_adversary(g)), dtype=np.int64).reshape(-1, 2)
    if extra.size == 0:
        return g
    if extra.min() < 1 or extra.max() > spec.n:
        raise SpecError("adversary returned an out-of-range endpoint")
    e0 = np.minimum(extra[:, 0], extra[:, 1]) - 1
    e1 = np.maximum(extra[:, 0], extra[:, 1]) - 1
    if np.any(e0 == e1):
        raise SpecError("adversary returned a self-loop")
    if np.any((e0 < h) != (e1 < h)):
        raise SpecError("adversary returned a crossing pair; additions are internal-only")
    before = g.num_edges
    g2 = Graph.from_arrays(
        spec.n,
        np.concatenate([g.edge_array[:, 0], e0]),
        np.concatenate([g.edge_array[:, 1], e1]),
    )
    return Graph(g2.n, g2.edge_array, adversary_edges=g2.num_edges - before)


def planted_clique_internal(half_n: int, p: float, clique_size: int, seed: Seed) -> Graph:
    """Erdos-Renyi G(half_n, p) with a clique planted on vertices 1..clique_size."""
    if not 0 <= clique_size <= half_n:
        raise SpecError(f"clique size must lie in 0..{half_n}, got {clique_size}")
    us, vs = [], []
    if p > 0 and half_n >= 2:
        u, v = _same_block_pairs(0, half_n)
        if p >= 1.0:
            keep = slice(None)
        else:
            draw = uniforms(seed, _pair_index(u, v, half_n))
            keep = draw < p
        us.append(u[keep])
        vs.append(v[keep])
    if clique_size >= 2:
        cu, cv = _same_block_pairs(0, clique_size)
        us.append(cu)
        vs.append(cv)
    if us:
        return Graph.from_arrays(half_n, np.concatenate(us), np.concatenate(vs))
    return Graph.from_arrays(half_n, np.array([], dtype=np.int64), np.array([], dtype=np.int64))


def erdos_renyi(n: int, p: float, seed: Seed) -> Graph:
    """Plain G(n, p) draw."""
    return planted_clique_internal(n, p, 0, seed)
