"""Compiled inner loops for exhaustive subgraph enumeration."""

import numba as nb
import numpy as np


@nb.njit(inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


def triple_table(n):
    """Dense index of (d1, d2, d3) with d1 + d2 + d3 <= n, row-major in (d1, d2, d3)."""
    table = np.full((n + 1, n + 1, n + 1), -1, dtype=np.int64)
    triples = []
    for d1 in range(n + 1):
        for d2 in range(n + 1 - d1):
            for d3 in range(n + 1 - d1 - d2):
                table[d1, d2, d3] = len(triples)
                triples.append((d1, d2, d3))
    return table, np.array(triples, dtype=np.int64).reshape(-1, 3)


@nb.njit(parallel=True, cache=True)
def enumerate_histograms(adj, n, num_edges, with_degrees, tri, n_tri, n_workers):
    """Per-worker dense histograms over (v, e, triple-index).

    Worker ``w`` owns the contiguous mask range ``[w * block, (w + 1) * block)``.
    """
    total = np.uint64(1) << np.uint64(n)
    width_t = n_tri if with_degrees else 1
    size = (n + 1) * (num_edges + 1) * width_t
    hists = np.zeros((n_workers, size), dtype=np.uint32)
    block = (total + np.uint64(n_workers) - np.uint64(1)) // np.uint64(n_workers)
    for w in nb.prange(n_workers):
        lo = np.uint64(w) * block
        hi = min(lo + block, total)
        h = hists[w]
        x = lo
        while x < hi:
            v = 0
            e2 = 0
            d1 = 0
            d2 = 0
            d3 = 0
            rest = x
            while rest:
                i = _popcount((rest & (~rest + np.uint64(1))) - np.uint64(1))
                rest &= rest - np.uint64(1)
                deg = _popcount(adj[i] & x)
                v += 1
                e2 += deg
                if deg == 1:
                    d1 += 1
                elif deg == 2:
                    d2 += 1
                elif deg == 3:
                    d3 += 1
            e = e2 // 2
            if with_degrees:
                idx = (v * (num_edges + 1) + e) * width_t + tri[d1, d2, d3]
            else:
                idx = v * (num_edges + 1) + e
            h[idx] += np.uint32(1)
            x += np.uint64(1)
    return hists
