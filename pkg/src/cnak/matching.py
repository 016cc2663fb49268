"""Minimum-cost perfect bipartite matching between centroid sets.

The solver is the Kuhn-Munkres (Hungarian) method with row/column
potentials, O(k^3). The inner scan over columns is vectorized; ties are
broken toward the lowest column index, so the result is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist


@dataclass(frozen=True)
class Matching:
    """``permutation[i]`` is the column matched to row ``i``."""

    permutation: np.ndarray
    total_cost: float

    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.permutation)
        inv[self.permutation] = np.arange(self.permutation.size)
        return inv


def centroid_cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distances ``costs[i, j] = |a_i - b_j|`` (not squared)."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape:
        raise ValueError(f"centroid sets differ in shape: {a.shape} vs {b.shape}")
    return cdist(a, b)


def _hungarian(cost: np.ndarray) -> np.ndarray:
    n = cost.shape[0]
    # 1-based indexing; column 0 and row 0 are sentinels.
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row matched to column j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            reduced = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (reduced < minv[1:])
            minv[1:][better] = reduced[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    perm = np.empty(n, dtype=np.int64)
    perm[p[1:] - 1] = np.arange(n)
    return perm


def min_cost_perfect_matching(costs: np.ndarray) -> Matching:
    """Exact minimum-cost assignment for a square, finite cost matrix."""
    c = np.asarray(costs, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {c.shape}")
    if c.shape[0] == 0:
        raise ValueError("cost matrix is empty")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix has non-finite entries")
    perm = _hungarian(c)
    # fsum makes the total independent of summation order.
    total = math.fsum(c[np.arange(c.shape[0]), perm])
    return Matching(perm, total)


def match_centroids(a: np.ndarray, b: np.ndarray) -> Matching:
    """Match centroid set ``a`` onto ``b``."""
    return min_cost_perfect_matching(centroid_cost_matrix(a, b))
