"""Compiled inner loops.

All kernels are deterministic regardless of thread count: parallel loops
write disjoint output slots and every per-pair reduction runs in a fixed
order (column order within a pair, compensated summation).
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _packed_pos(n, i, j):
    # strict upper triangle, row-major; requires i < j
    return i * (n - 1) - (i * (i - 1)) // 2 + (j - i - 1)


@njit(cache=True, parallel=True)
def pseudo_metric_pairs(losses, cols, i_idx, j_idx, out):
    """Mean absolute per-column loss difference for each (i, j) row pair,
    Kahan-compensated in column order."""
    m = cols.shape[0]
    for p in prange(i_idx.shape[0]):
        a = i_idx[p]
        b = j_idx[p]
        s = 0.0
        c = 0.0
        for q in range(m):
            col = cols[q]
            d = abs(losses[a, col] - losses[b, col])
            y = d - c
            t = s + y
            c = (t - s) - y
            s = t
        out[p] = s / m


@njit(cache=True, parallel=True)
def euclidean_pairs(points, i_idx, j_idx, out):
    """l2 distance for each (i, j) row pair, Kahan-compensated over
    coordinates."""
    dim = points.shape[1]
    for p in prange(i_idx.shape[0]):
        a = i_idx[p]
        b = j_idx[p]
        s = 0.0
        c = 0.0
        for q in range(dim):
            d = points[a, q] - points[b, q]
            d = d * d
            y = d - c
            t = s + y
            c = (t - s) - y
            s = t
        out[p] = np.sqrt(s)


@njit(cache=True)
def mst_deaths_prim(packed, n, subset):
    """Edge-weight multiset of a minimum spanning tree of the complete
    graph on subset, weights read from the packed upper triangle of an
    n-point distance matrix. Returned in insertion order (not sorted)."""
    k = subset.shape[0]
    deaths = np.empty(k - 1)
    in_tree = np.zeros(k, dtype=np.bool_)
    mind = np.empty(k)
    in_tree[0] = True
    s0 = subset[0]
    for t in range(1, k):
        st = subset[t]
        if s0 < st:
            mind[t] = packed[_packed_pos(n, s0, st)]
        else:
            mind[t] = packed[_packed_pos(n, st, s0)]
    for step in range(k - 1):
        best = -1
        bestv = np.inf
        for t in range(1, k):
            if not in_tree[t] and mind[t] < bestv:
                bestv = mind[t]
                best = t
        deaths[step] = bestv
        in_tree[best] = True
        sb = subset[best]
        for t in range(1, k):
            if not in_tree[t]:
                st = subset[t]
                if sb < st:
                    d = packed[_packed_pos(n, sb, st)]
                else:
                    d = packed[_packed_pos(n, st, sb)]
                if d < mind[t]:
                    mind[t] = d
    return deaths


@njit(cache=True)
def kruskal_accept(i_idx, j_idx, weights, n):
    """Union-find pass over edges already sorted ascending; returns the
    accepted edge weights in acceptance order (nondecreasing). Path
    compression plus union by rank."""
    parent = np.arange(n, dtype=np.int64)
    rank = np.zeros(n, dtype=np.int64)
    deaths = np.empty(n - 1)
    cnt = 0
    for e in range(i_idx.shape[0]):
        a = i_idx[e]
        b = j_idx[e]
        ra = a
        while parent[ra] != ra:
            ra = parent[ra]
        while parent[a] != ra:
            nxt = parent[a]
            parent[a] = ra
            a = nxt
        rb = b
        while parent[rb] != rb:
            rb = parent[rb]
        while parent[b] != rb:
            nxt = parent[b]
            parent[b] = rb
            b = nxt
        if ra == rb:
            continue
        if rank[ra] < rank[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        if rank[ra] == rank[rb]:
            rank[ra] += 1
        deaths[cnt] = weights[e]
        cnt += 1
        if cnt == n - 1:
            break
    return deaths[:cnt]
