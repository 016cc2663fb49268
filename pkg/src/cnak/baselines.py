"""Reference clusterers: Bootstrap Averaging, grid-based recursive-partition
k-means (RPKM) and Refining Seeds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _rng
from ._parallel import ordered_map
from .core import ClusterResult, DataError, as_points
from .kmeans import KMeansConfig, assign, kmeans, lloyd, within_cluster_ss

MAX_GRID_ATTRIBUTES = 8
DEFAULT_DEPTH = 4


def _finish(x: np.ndarray, centroids: np.ndarray, labels=None, **diag) -> ClusterResult:
    labels = assign(x, centroids) if labels is None else labels
    return ClusterResult(k=centroids.shape[0], centroids=centroids, labels=labels,
                         inertia=within_cluster_ss(x, centroids, labels), diagnostics=diag)


# ----------------------------------------------------------------- bootstrap

def minmax_scale(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scale each column to [0, 1]; constant columns map to 0."""
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (x - lo) / span, lo, span


def signatures(centroids: np.ndarray) -> np.ndarray:
    """Binary-weighted attribute sum ``sum_l c_l 2^l``, scaled by ``2^-(d-1)``.

    The scale keeps the weights representable for any d and does not change
    the order of the signatures.
    """
    d = centroids.shape[1]
    weights = np.exp2(np.arange(d) - (d - 1.0))
    return centroids @ weights


def bootstrap_averaging(data, k: int, t: int = 10, seed: int = 0, sample_size: Optional[int] = None,
                        threads: int = 1) -> ClusterResult:
    """Cluster ``t`` bootstrap resamples, pool the ``t * k`` centroids, sort them
    by signature, cut the order into k groups of t and average each group.

    Work happens on min-max normalized features; every point joins its nearest
    group mean. Returned centroids are in the original coordinates.
    """
    x = as_points(data)
    n = x.shape[0]
    if t < 1:
        raise ValueError("t must be >= 1")
    if k > n:
        raise DataError(f"k={k} exceeds the number of points {n}")
    m = n if sample_size is None else int(sample_size)
    xn, lo, span = minmax_scale(x)

    def one(i):
        idx = _rng.stream(seed, _rng.BOOTSTRAP, i).integers(0, n, size=m)
        s = _rng.child_seed(_rng.stream(seed, _rng.KMEANS, i))
        return kmeans(xn[idx], KMeansConfig(k=k, seed=s)).centroids

    pooled = np.vstack(ordered_map(one, range(t), threads))
    order = np.argsort(signatures(pooled), kind="stable")
    groups = pooled[order].reshape(k, t, -1)
    means = groups.mean(axis=1)
    labels = assign(xn, means)
    return _finish(x, means * span + lo, labels, t=t, sample_size=m)


# ---------------------------------------------------------------------- RPKM

@dataclass
class GridNode:
    depth: int
    cell: tuple
    representative: np.ndarray
    cardinality: int
    children: list = field(default_factory=list)


def grid_cells(x: np.ndarray, depth: int) -> np.ndarray:
    """Integer cell coordinates at ``depth`` over the bounding box of ``x``."""
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    side = 2 ** depth
    cells = np.floor((x - lo) / span * side).astype(np.int64)
    return np.clip(cells, 0, side - 1)


def build_grid(x: np.ndarray, depth: int, attributes: Optional[np.ndarray] = None) -> list:
    """Nodes of every level, ``levels[i]`` holding depth ``i`` (0 is the root).

    The grid splits on ``attributes`` only; representatives keep every
    dimension. Leaves average their points, and each parent is the
    cardinality-weighted mean of its children.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    attrs = np.arange(x.shape[1]) if attributes is None else np.asarray(attributes)
    leaf_cells = grid_cells(x[:, attrs], depth)
    keys, inv = np.unique(leaf_cells, axis=0, return_inverse=True)
    inv = inv.ravel()
    counts = np.bincount(inv)
    sums = np.zeros((keys.shape[0], x.shape[1]))
    np.add.at(sums, inv, x)
    levels = [[GridNode(depth, tuple(c), sums[i] / counts[i], int(counts[i]))
               for i, c in enumerate(keys)]]
    for level in range(depth - 1, -1, -1):
        parents: dict[tuple, list] = {}
        for node in levels[0]:
            parents.setdefault(tuple(v >> 1 for v in node.cell), []).append(node)
        nodes = []
        for cell in sorted(parents):
            kids = parents[cell]
            card = sum(c.cardinality for c in kids)
            rep = np.sum([c.representative * c.cardinality for c in kids], axis=0) / card
            nodes.append(GridNode(level, cell, rep, card, kids))
        levels.insert(0, nodes)
    return levels


def rpkm(data, k: int, depth: int = DEFAULT_DEPTH, seed: int = 0,
         max_attributes: int = MAX_GRID_ATTRIBUTES) -> ClusterResult:
    """Weighted Lloyd over grid representatives, from the leaves upward.

    The leaf level starts from k random representatives; each coarser level
    starts from the centroids of the level below. The sweep ends at the last
    level with at least k nodes.
    """
    x = as_points(data)
    d = x.shape[1]
    attrs = np.arange(d)
    if d > max_attributes:
        attrs = np.sort(_rng.stream(seed, _rng.ATTRIBUTES).choice(d, max_attributes, replace=False))
    levels = build_grid(x, depth, attrs)
    leaves = levels[-1]
    if len(leaves) < k:
        raise DataError(f"k={k} exceeds the {len(leaves)} non-empty grid cells at depth {depth}")
    reps = np.array([nd.representative for nd in leaves])
    pick = _rng.stream(seed, _rng.CLUSTER).choice(len(leaves), k, replace=False)
    centroids = reps[pick]
    used = []
    for lvl in range(depth, -1, -1):
        nodes = levels[lvl]
        if len(nodes) < k:
            break
        reps = np.array([nd.representative for nd in nodes])
        w = np.array([nd.cardinality for nd in nodes], dtype=np.float64)
        res = lloyd(reps, centroids, KMeansConfig(k=k), weights=w)
        centroids = res.centroids
        used.append(lvl)
    return _finish(x, centroids, levels_used=used, attributes=attrs.tolist())


# ------------------------------------------------------------ refining seeds

def refine_seeds(data, k: int, J: int = 10, sample_fraction: float = 0.1, seed: int = 0,
                 threads: int = 1) -> ClusterResult:
    """Pick initial centroids by clustering the pooled centroids of J small
    samples, then run k-means on the full data from them."""
    x = as_points(data)
    n = x.shape[0]
    if J < 1:
        raise ValueError("J must be >= 1")
    if not 0.0 < sample_fraction <= 1.0:
        raise ValueError("sample_fraction must be in (0, 1]")
    m = min(n, math.ceil(sample_fraction * n))
    if m < k:
        raise DataError(f"sample size {m} is smaller than k={k}")

    def one(i):
        rng = _rng.stream(seed, _rng.SAMPLE, i)
        sample = x[rng.choice(n, m, replace=False)]
        init = sample[rng.choice(m, k, replace=False)]
        return lloyd(sample, init, KMeansConfig(k=k)).centroids

    cm_sets = ordered_map(one, range(J), threads)
    cm = np.vstack(cm_sets)
    fm = ordered_map(lambda c: lloyd(cm, c, KMeansConfig(k=k)), cm_sets, threads)
    distortions = [r.inertia for r in fm]
    best = int(np.argmin(distortions))
    final = lloyd(x, fm[best].centroids, KMeansConfig(k=k))
    final.diagnostics.update(distortions=distortions, chosen=best)
    return final
