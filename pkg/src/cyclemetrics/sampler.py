"""Uniform random {0,k}-mappings, uniform unrestricted mappings, and exhaustive enumeration.

Randomness comes from numpy's PCG64 bit generator.  A sample stream is
identified by ``(seed, stream_index)`` and seeded through
``SeedSequence(seed, spawn_key=(stream_index,))``, so any stream can be
regenerated on its own, in any order, on any worker.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .fungraph import MappingTable

__all__ = [
    "SamplerConfig",
    "EnumerationGuardError",
    "ENUMERATION_LIMIT",
    "make_rng",
    "sample_0k_mapping",
    "sample_0k_zero_based",
    "sample_0k_core",
    "sample_0k_cyclic_count",
    "sample_unrestricted_mapping",
    "count_0k_mappings",
    "enumerate_0k_mappings",
]

ENUMERATION_LIMIT = 10**7


class EnumerationGuardError(ValueError):
    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"enumeration would produce {count} mappings, above the limit {limit}")


def make_rng(seed: int, stream_index: int = 0) -> np.random.Generator:
    """Generator for one reproducible sub-stream."""
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if stream_index < 0:
        raise ValueError(f"stream_index must be >= 0, got {stream_index}")
    ss = np.random.SeedSequence(seed, spawn_key=(stream_index,))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class SamplerConfig:
    r: int
    k: int
    seed: int = 0
    stream_index: int = 0

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")

    @property
    def n(self) -> int:
        return self.k * self.r

    def rng(self) -> np.random.Generator:
        return make_rng(self.seed, self.stream_index)


def sample_0k_zero_based(r: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Algorithm 1 on ``{0..n-1}``: two uniform permutations, then ``f(tau[ik+j]) = sigma[i]``."""
    n = r * k
    sigma = rng.permutation(n)
    tau = rng.permutation(n)
    return _kernels.assign_blocks(sigma, tau, k)


def sample_0k_mapping(cfg: SamplerConfig) -> MappingTable:
    """A uniform random {0,k}-mapping on ``n = k*r`` nodes, reproducible from ``cfg``."""
    return MappingTable.from_zero_based(sample_0k_zero_based(cfg.r, cfg.k, cfg.rng()))


def sample_0k_core(r: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Restriction of a uniform {0,k}-mapping to its image set, relabelled onto ``{0..r-1}``.

    Every cycle of a {0,k}-mapping lies inside its image ``N_k``, so this
    r-node map has exactly the cycle structure (Z, cycle lengths, T, B) of a
    uniform {0,k}-mapping on ``n = k*r`` nodes.  In Algorithm 1, labelling
    ``sigma[i]`` as ``i`` gives ``g(i) = tauinv[sigma[i]] // k``, and the
    positions ``tauinv[sigma[0..r-1]]`` form a uniform injective sequence in
    ``{0..n-1}``.  That sequence is drawn here by rejecting repeated slots,
    which costs about ``r`` draws instead of two full permutations.
    """
    return _core(r, k, rng)[0]


def _core(r: int, k: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n = r * k
    used = np.zeros(n, dtype=np.uint8)
    out = np.empty(r, dtype=np.int32)
    indeg = np.zeros(r, dtype=np.uint8 if k < 256 else np.int32)
    pos = 0
    while pos < r:
        need = r - pos
        free = n - pos
        # expected draws for the remaining entries, plus slack; leftovers are discarded
        expect = free * (math.log(free) - math.log(free - need)) if free > need else 2.0 * need
        batch = int(expect * 1.02) + 64
        dtype = np.uint32 if n <= 2**32 else np.uint64
        cand = rng.integers(0, n, size=batch, dtype=dtype)
        pos = _kernels.fill_injection(cand, used, out, indeg, pos, k)
    return out, indeg


def sample_0k_cyclic_count(r: int, k: int, rng: np.random.Generator) -> int:
    """Number of cyclic nodes of one uniform {0,k}-mapping on ``n = k*r`` nodes."""
    g, indeg = _core(r, k, rng)
    return int(_kernels.peel_count(g, indeg))


def sample_unrestricted_mapping(n: int, seed: int = 0, stream_index: int = 0) -> MappingTable:
    """Each ``f(i)`` independent and uniform on ``[1, n]``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = make_rng(seed, stream_index)
    return MappingTable(n, rng.integers(1, n + 1, size=n, dtype=np.int64))


def count_0k_mappings(r: int, k: int) -> int:
    """``C(n, r) * n! / (k!)^r`` for ``n = k*r``."""
    n = k * r
    return math.comb(n, r) * (math.factorial(n) // math.factorial(k) ** r)


def _multiset_permutations(counts: list[int], length: int) -> Iterator[list[int]]:
    """Sequences over ``range(len(counts))`` using symbol ``s`` exactly ``counts[s]`` times, lexicographically."""
    seq = [0] * length

    def rec(pos):
        if pos == length:
            yield list(seq)
            return
        for s, c in enumerate(counts):
            if c:
                counts[s] -= 1
                seq[pos] = s
                yield from rec(pos + 1)
                counts[s] += 1

    yield from rec(0)


def enumerate_0k_mappings(r: int, k: int, limit: int = ENUMERATION_LIMIT) -> Iterator[MappingTable]:
    """Every {0,k}-mapping on ``n = k*r`` nodes exactly once.

    Ordered lexicographically by the image set ``N_k`` and then by the
    sequence ``(f(1), ..., f(n))`` of preimage assignments.
    """
    if r < 1 or k < 2:
        raise ValueError(f"need r >= 1 and k >= 2, got r={r}, k={k}")
    total = count_0k_mappings(r, k)
    if total > limit:
        raise EnumerationGuardError(total, limit)
    n = k * r
    return _enumerate(n, r, k)


def _enumerate(n: int, r: int, k: int) -> Iterator[MappingTable]:
    for image_set in itertools.combinations(range(1, n + 1), r):
        targets = np.array(image_set, dtype=np.int64)
        for seq in _multiset_permutations([k] * r, n):
            yield MappingTable(n, targets[seq])
