"""
Lognormal behaviour and first hits
==================================

log T and log B, after centering and scaling, should look roughly normal.
We measure that with the Kolmogorov-Smirnov distance to N(0, 1).  Then we
count how many random mappings are needed before T crosses a threshold.
"""

import math

from cyclemetrics import experiments

for n in (2**10, 2**14):
    rep = experiments.run_lognormality(n, 2, samples=500, seed=7)
    print(f"n=2^{int(math.log2(n))}: KS_T={rep.ks_T:.3f}, KS_B={rep.ks_B:.3f}, mean chi={rep.mean_chi:.3f}")

# At n = 4, k = 2 a draw has T = 2 with probability 1/3, so the number of
# draws until T >= 2 is geometric with mean 3.
cfg = experiments.FirstHitConfig(4, 2, threshold_log=math.log(2), seed=9)
draws = [res.draws for res in experiments.first_hit_trials(cfg, 2000)]
print("mean draws until T >= 2:", sum(draws) / len(draws))

# How often Z falls in the concentration window.
conc = experiments.sample_concentration(10**4, 2, 1000, seed=1)
print(f"fraction of Z in [{conc.xi1:.1f}, {conc.xi2:.1f}]: {conc.fraction:.3f}")
