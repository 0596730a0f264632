"""
The distribution of the number of cyclic nodes
==============================================

P(Z = m) has a closed form.  We evaluate it three ways: exact fractions,
a log-gamma form that works for huge n, and an approximation.  We also
locate its peak m_# and the window [xi1, xi2] where most of the mass sits.
"""

from cyclemetrics import cyclestats

# Exact law for n = 4, k = 2: P(Z=1) = 1/3, P(Z=2) = 2/3.
d = cyclestats.z_distribution(4, 2, "exact-rational")
print("n=4, k=2:", [str(p) for p in d.probabilities], "total", d.total())

# The log-gamma form agrees with the exact one when both are available.
n, k = 600, 3
exact = cyclestats.z_distribution(n, k, "exact-rational")
fast = cyclestats.z_distribution(n, k, "exact-loggamma")
worst = max(abs(float(a) - b) for a, b in zip(exact.probabilities, fast.probabilities))
print("max |exact - loggamma| at n=600, k=3:", worst)

# The peak sits next to m_# = sqrt(n/lambda + 1/4) - 1/2.
for n, k in [(10**4, 2), (10**6, 2), (10**8, 5)]:
    dist = cyclestats.z_distribution(n, k)
    b = cyclestats.mode_and_concentration(n, k)
    print(f"n={n:>10} k={k}: mode {dist.mode()}, m_# {b.m_sharp:.2f}, "
          f"mass in [{b.xi1:.1f}, {b.xi2:.1f}] = {dist.mass_between(b.xi1, b.xi2):.5f}")
