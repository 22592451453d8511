"""Counter-based random streams for order-independent sampling.

Every random draw in this package is a pure function of
``(base_seed, stream, counter)``.  The counter is mixed through the
SplitMix64 finalizer (Steele, Lea & Flood's mixing constants), so a draw
never depends on how many draws were made before it.  This is what makes
graph sampling reproducible under any parallel schedule: two workers
sampling different pairs of the same graph read disjoint counters of the
same keyed stream.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MULT_A = 0xBF58476D1CE4E5B9
_MULT_B = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int, mod 2^64."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MULT_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MULT_B) & _MASK64
    return z ^ (z >> 31)


def stable_stream(label: str) -> int:
    """Map a label to a 64-bit stream id, stable across runs and platforms."""
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class Seed:
    """A (base_seed, stream) pair naming one independent random stream.

    Identical seeds reproduce identical draws regardless of thread count,
    draw order, or platform.
    """

    base_seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "base_seed", int(self.base_seed) & _MASK64)
        object.__setattr__(self, "stream", int(self.stream) & _MASK64)

    def key(self) -> int:
        return _mix64(_mix64(self.base_seed + _GAMMA) ^ _mix64(self.stream))

    def derive(self, label: str) -> "Seed":
        """Child seed for an independent purpose (edges vs. start vectors etc.)."""
        return Seed(self.base_seed, _mix64(self.stream ^ stable_stream(label)))


def uniforms(seed: Seed, counters: np.ndarray) -> np.ndarray:
    """Uniform [0,1) variates for the given counters of ``seed``'s stream.

    Output ``u[i]`` depends only on ``(seed, counters[i])``.
    """
    c = np.asarray(counters, dtype=np.uint64)
    z = np.uint64(seed.key()) + c * np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MULT_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MULT_B)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def uniform_block(seed: Seed, start: int, count: int) -> np.ndarray:
    """Uniforms for the contiguous counter range [start, start + count)."""
    return uniforms(seed, np.arange(start, start + count, dtype=np.uint64))


def start_vector(seed: Seed, n: int) -> np.ndarray:
    """Deterministic non-degenerate start vector for iterative eigensolves."""
    v = uniform_block(seed, 0, n) - 0.5
    # guard against the (measure-zero) all-zero draw
    if not np.any(v):
        v[0] = 1.0
    return v / np.linalg.norm(v)
