"""
Polynomial maps over a prime field
==================================

The map x -> x^d + a on F_p has indegrees 0, 1 or k = gcd(p-1, d).  Its
indegree profile is fixed by p and k alone, which is why it behaves much
like a random {0,k}-mapping.
"""

from cyclemetrics import ffpoly
from cyclemetrics.fungraph import cycle_structure, indegree_profile

spec = ffpoly.PolySpec(13, 4, 3)
f = ffpoly.poly_mapping(spec)
print("x^4 + 3 on F_13, k =", spec.k)
print("indegree counts:", dict(indegree_profile(f).counts))
print("predicted counts:", ffpoly.indegree_law(13, spec.k))
print("law verified:", ffpoly.verify_indegree_law(spec))
print(cycle_structure(f))

# Primes with p = 1 (mod k) make gcd(p-1, k) = k.
print("first primes above 1000 with p = 1 mod 3:", ffpoly.primes_congruent(1000, 3, 5))
