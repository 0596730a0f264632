"""Functional graphs of ``x^d + a`` over the prime field ``F_p``.

Field element ``x`` is node ``x + 1`` of the resulting :class:`MappingTable`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fungraph import IndegreeProfile, MappingTable, indegree_profile

__all__ = [
    "PolySpec",
    "is_prime",
    "power_table",
    "poly_mapping",
    "indegree_law",
    "verify_indegree_law",
    "primes_congruent",
]

# Deterministic for every n < 3.3e24, which covers all 64-bit inputs.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PolySpec:
    p: int
    d: int
    a: int = 0

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if not 0 <= self.a < self.p:
            raise ValueError(f"a must lie in [0, {self.p - 1}], got {self.a}")

    @property
    def k(self) -> int:
        return math.gcd(self.p - 1, self.d)


def power_table(p: int, d: int) -> np.ndarray:
    """``x^d mod p`` for every ``x`` in ``F_p``, by vectorised square-and-multiply."""
    x = np.arange(p, dtype=np.int64)
    if p >= 1 << 31:
        return np.array([pow(int(v), d, p) for v in x], dtype=np.int64)
    result = np.ones(p, dtype=np.int64)
    base = x.copy()
    e = d
    while e:
        if e & 1:
            result = result * base % p
        e >>= 1
        if e:
            base = base * base % p
    return result


def poly_mapping(spec: PolySpec, powers: np.ndarray | None = None) -> MappingTable:
    """The map ``x -> x^d + a`` on ``F_p`` as a table on ``[p]``.

    Pass a precomputed :func:`power_table` to sweep many shifts ``a`` cheaply.
    """
    if powers is None:
        powers = power_table(spec.p, spec.d)
    return MappingTable.from_zero_based((powers + spec.a) % spec.p)


def indegree_law(p: int, k: int) -> dict[int, int]:
    """Indegree counts of a {0,k}-polynomial on ``F_p``: ``{0: (1-1/k)(p-1), 1: 1, k: (p-1)/k}``."""
    return {0: (p - 1) - (p - 1) // k, 1: 1, k: (p - 1) // k}


def verify_indegree_law(spec: PolySpec) -> bool:
    """Whether the tallied indegrees of ``x^d + a`` match the {0,k}-polynomial law exactly."""
    k = spec.k
    if k < 2:
        raise ValueError(f"gcd(p-1, d) = {k}: the map permutes F_p and the law needs k >= 2")
    prof: IndegreeProfile = indegree_profile(poly_mapping(spec))
    return dict(prof.counts) == indegree_law(spec.p, k)


def primes_congruent(start: int, k: int, count: int, residue: int = 1) -> list[int]:
    """The first ``count`` primes ``p > start`` with ``p = residue (mod k)``, ascending."""
    if start < 2 or k < 1 or count < 1:
        raise ValueError("need start >= 2, k >= 1, count >= 1")
    residue %= k
    if math.gcd(residue, k) != 1 and k > 1:
        raise ValueError(f"no infinite family of primes = {residue} mod {k}")
    out = []
    p = start + 1
    p += (residue - p) % k
    while len(out) < count:
        if is_prime(p):
            out.append(p)
        p += k
    return out
