"""Compiled inner loops shared by the graph and sampling modules.

Every kernel works on 0-indexed ``int32``/``int64`` image arrays and releases
the GIL, so callers may run them from a thread pool.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def cyclic_mask(f):
    """Boolean mask of cyclic nodes, found by peeling indegree-0 nodes layer by layer."""
    n = f.shape[0]
    indeg = np.zeros(n, np.int32)
    for x in range(n):
        indeg[f[x]] += 1
    queue = np.empty(n, np.int32)
    top = 0
    for x in range(n):
        if indeg[x] == 0:
            queue[top] = x
            top += 1
    lo = 0
    while lo < top:
        hi = top
        for q in range(lo, hi):
            y = f[queue[q]]
            indeg[y] -= 1
            if indeg[y] == 0:
                queue[top] = y
                top += 1
        lo = hi
    alive = np.ones(n, np.bool_)
    for q in range(top):
        alive[queue[q]] = False
    return alive


@njit(cache=True, nogil=True)
def cycle_lengths(f, alive):
    """Lengths of the cycles through the nodes flagged in ``alive``; each cycle is walked once."""
    n = f.shape[0]
    seen = np.zeros(n, np.bool_)
    out = np.empty(n, np.int64)
    c = 0
    for x in range(n):
        if alive[x] and not seen[x]:
            length = 0
            y = x
            while not seen[y]:
                seen[y] = True
                y = f[y]
                length += 1
            out[c] = length
            c += 1
    return out[:c]


@njit(cache=True, nogil=True)
def walk_cyclic_count(f):
    """Count cyclic nodes by following each unvisited node until the walk closes."""
    n = f.shape[0]
    mark = np.full(n, -1, np.int64)
    z = 0
    for s in range(n):
        if mark[s] != -1:
            continue
        x = s
        while mark[x] == -1:
            mark[x] = s
            x = f[x]
        if mark[x] == s:
            y = x
            while True:
                z += 1
                y = f[y]
                if y == x:
                    break
    return z


@njit(cache=True, nogil=True)
def fill_injection(candidates, used, out, indeg, pos, k):
    """Consume uniform slot draws, keep first occurrences, and store their block index.

    ``used`` flags taken slots (one byte each); ``indeg`` tallies hits per
    block.  A repeated slot still writes ``out[pos]`` but does not advance
    ``pos``, which keeps the loop free of unpredictable branches.  Returns the
    number of entries of ``out`` filled so far.
    """
    r = out.shape[0]
    m = candidates.shape[0]
    i = 0
    while i < m and pos < r:
        c = candidates[i]
        fresh = 1 - used[c]
        used[c] = 1
        b = c // k
        out[pos] = b
        indeg[b] += fresh
        pos += fresh
        i += 1
    return pos


@njit(cache=True, nogil=True)
def peel_count(f, indeg):
    """Number of nodes left after peeling, given a precomputed (and consumed) indegree array."""
    n = f.shape[0]
    queue = np.empty(n, np.int32)
    top = 0
    for x in range(n):
        if indeg[x] == 0:
            queue[top] = x
            top += 1
    lo = 0
    while lo < top:
        hi = top
        for q in range(lo, hi):
            y = f[queue[q]]
            indeg[y] -= 1
            if indeg[y] == 0:
                queue[top] = y
                top += 1
        lo = hi
    return n - top


@njit(cache=True, nogil=True)
def assign_blocks(sigma, tau, k):
    """Algorithm-1 double loop: f(tau[i*k + j]) = sigma[i] (0-indexed)."""
    n = tau.shape[0]
    r = n // k
    f = np.empty(n, np.int64)
    for i in range(r):
        s = sigma[i]
        for j in range(k):
            f[tau[i * k + j]] = s
    return f
