"""
Comparing mapping classes
=========================

For each class and each of several primes p, we measure log of the mean of
T and of B, and divide by the predicted log E[T] and log E[B].  Classes
with the same lambda should give similar ratios R_T.
"""

import io

from cyclemetrics import experiments

classes = ["unrestricted", "{0,2}", "{0,3}", "x^2+a", "x^3+a"]
records = experiments.run_table1(classes, prime_start=1000, num_primes=3, samples_per_prime=200, seed=0)

for label, row in experiments.summarize_table1(records).items():
    print(f"{label:>14}: lambda={row['lambda']}, mean R_T={row['R_T']:.4f}, mean R_B={row['R_B']:.4f}")

# The records round-trip through CSV without losing a digit.
buf = io.StringIO()
experiments.write_csv(records, buf)
print(buf.getvalue().splitlines()[0])
assert experiments.read_csv(buf.getvalue()) == records
