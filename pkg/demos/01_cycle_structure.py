"""
Cycle structure of a functional graph
=====================================

A mapping f on {1..n} is a graph where every node has one outgoing edge.
Following the edges eventually lands on a cycle; the nodes on cycles are
the *cyclic* nodes.  This demo computes the statistics we care about:

* Z, the number of cyclic nodes,
* C, the number of cycles,
* T, the lcm of the cycle lengths (the period of the iteration),
* B, the product of the cycle lengths.
"""

import io

import numpy as np

from cyclemetrics import fungraph

# A small mapping, written as its image table: f(1)=2, f(2)=1, f(3)=4, ...
f = fungraph.MappingTable(5, np.array([2, 1, 4, 3, 5]))
s = fungraph.cycle_structure(f)
print("Z =", s.Z, "C =", s.C, "lengths =", s.cycle_lengths)

# T and B are kept in factored form, so they never overflow.
print("T =", s.order_T.value, "B =", s.product_B.value)
print("log T =", s.log_T, "log B =", s.log_B)

# The indegree profile counts how many nodes have each indegree.  The
# coalescence is  sum_j j^2 c_j / n - 1 ; it is 0 for a permutation.
prof = fungraph.indegree_profile(f)
print("indegree counts:", dict(prof.counts), "coalescence:", prof.coalescence)

# Mappings are read and written in a plain text format: a header "n k",
# then the n images.  k = 0 means "no restriction declared".
text = "6 2\n2 2 4 4 1 1\n"
g = fungraph.read_mapping(io.StringIO(text))
print(fungraph.cycle_structure(g))

# A header that declares k=2 is checked: every indegree must be 0 or 2.
try:
    fungraph.read_mapping(io.StringIO("4 2\n2 1 2 2\n"))
except fungraph.MappingFormatError as err:
    print("rejected:", err)
