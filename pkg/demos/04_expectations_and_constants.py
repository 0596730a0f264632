"""
Expected period and the constants of the asymptotics
====================================================

E[T] and E[B] are exact rationals for small n.  For large n we rely on the
growth of mu_m (the mean of B over permutations of m points) and on the
constants I, beta0 and k0 that predict log E[T] and log E[B].
"""

import math

from cyclemetrics import cyclestats

# Exact expectations for the 36 mappings at n = 4, k = 2.
print("E[T] =", cyclestats.exact_expected_T(4, 2), " E[B] =", cyclestats.exact_expected_B(4, 2))

# mu_m against its asymptotic form  exp(2 sqrt m) / (2 sqrt(pi e) m^(3/4)).
for m in (10, 100, 1000, 10**4):
    approx = math.exp(2 * math.sqrt(m)) / (2 * math.sqrt(math.pi * math.e) * m**0.75)
    print(f"m={m:>6}: mu_m / asymptotic = {cyclestats.exact_mu(m) / approx:.6f}")

c = cyclestats.constants()
print(f"I = {c.I:.12f}, beta0 = {c.beta0:.12f}, k0 = {c.k0:.12f}")

# Predicted log E[T] and log E[B] for n = 10^6 with lambda = 1.
print("log E[T] ~", cyclestats.predictor_logET(1e6, 1), " log E[B] ~", cyclestats.predictor_logEB(1e6, 1))
