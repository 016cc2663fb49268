"""k-means++ seeding and Lloyd iteration.

This is the clustering engine shared by CNAK, the comparison indices and the
baseline clusterers. Distances are squared Euclidean throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from . import _rng
from .core import ClusterResult, DataError, Dataset, as_points

ArrayLike = Union[Dataset, np.ndarray]

# Above this many n*k*d elements, squared distances use the dot-product
# expansion instead of explicit differences.
_DIRECT_LIMIT = 2_000_000


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 2
    max_iter: int = 300
    tol: float = 1e-6
    seed: int = 0
    n_init: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")

    def with_k(self, k: int) -> "KMeansConfig":
        return replace(self, k=k)


def squared_distances(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``(n, k)`` matrix of squared Euclidean distances."""
    n, d = x.shape
    k = c.shape[0]
    if n * k * d <= _DIRECT_LIMIT:
        diff = x[:, None, :] - c[None, :, :]
        return np.einsum("nkd,nkd->nk", diff, diff)
    d2 = (x * x).sum(axis=1)[:, None] - 2.0 * (x @ c.T) + (c * c).sum(axis=1)[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def _nearest(x: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # argmin returns the first minimum, so ties go to the lowest index.
    labels = squared_distances(x, c).argmin(axis=1)
    diff = x - c[labels]
    return labels, np.einsum("nd,nd->n", diff, diff)


def assign(data: ArrayLike, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid for every point."""
    c = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    if c.shape[0] == 0:
        raise ValueError("centroids must be non-empty")
    return _nearest(as_points(data), c)[0]


def within_cluster_ss(data: ArrayLike, centroids: np.ndarray, labels: np.ndarray,
                      weights: Optional[np.ndarray] = None) -> float:
    x = as_points(data)
    diff = x - np.asarray(centroids, dtype=np.float64)[np.asarray(labels)]
    sq = np.einsum("nd,nd->n", diff, diff)
    if weights is not None:
        sq = sq * weights
    return float(sq.sum())


def kmeanspp_init(data: ArrayLike, k: int, rng: np.random.Generator,
                  weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Arthur-Vassilvitskii D^2 seeding; the first seed is uniform.

    With ``weights`` the selection probabilities are multiplied by the point
    weights (used for grid representatives).
    """
    x = as_points(data)
    n = x.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n:
        raise DataError(f"cannot pick {k} seeds from {n} points")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    if weights is None:
        first = int(rng.integers(n))
    else:
        first = min(int(np.searchsorted(np.cumsum(w), rng.random() * w.sum(), side="right")), n - 1)
    chosen = [first]
    d2 = _sq_to(x, x[chosen[0]])
    for _ in range(1, k):
        mass = d2 * w
        total = mass.sum()
        if not total > 0:
            raise DataError(f"fewer than {k} distinct points; cannot seed {k} centroids")
        cum = np.cumsum(mass)
        # cum[idx] > u >= cum[idx - 1] implies mass[idx] > 0; u can only reach
        # cum[-1] through rounding, in which case take the last massive point.
        idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        if idx >= n:
            idx = int(np.flatnonzero(mass)[-1])
        chosen.append(idx)
        np.minimum(d2, _sq_to(x, x[idx]), out=d2)
    return x[chosen].copy()


def _sq_to(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    diff = x - p
    return np.einsum("nd,nd->n", diff, diff)


def _update(x, labels, sq, centroids, weights):
    k = centroids.shape[0]
    w = np.ones(x.shape[0]) if weights is None else weights
    mass = np.bincount(labels, weights=w, minlength=k)
    sums = np.zeros_like(centroids)
    np.add.at(sums, labels, x * w[:, None])
    new = centroids.copy()
    filled = mass > 0
    new[filled] = sums[filled] / mass[filled, None]
    empty = np.flatnonzero(~filled)
    if empty.size:
        # Reseed each empty centroid at the point farthest from its own centroid.
        order = np.argsort(-sq, kind="stable")
        for j, idx in zip(empty, order):
            new[j] = x[idx]
    return new, int(empty.size)


def lloyd(data: ArrayLike, init: np.ndarray, cfg: Optional[KMeansConfig] = None,
          weights: Optional[np.ndarray] = None) -> ClusterResult:
    """Lloyd iterations from ``init`` until the relative inertia drop is <= tol.

    The returned labels are the nearest-centroid assignment of the returned
    centroids; ``inertia_history`` records J after every assignment step.
    """
    x = as_points(data)
    c = np.array(init, dtype=np.float64, ndmin=2)
    if c.shape[1] != x.shape[1]:
        raise DataError(f"init has dimension {c.shape[1]}, data has {x.shape[1]}")
    if c.shape[0] > x.shape[0]:
        raise DataError(f"k={c.shape[0]} exceeds the number of points {x.shape[0]}")
    cfg = cfg or KMeansConfig(k=c.shape[0])
    w = None if weights is None else np.asarray(weights, dtype=np.float64)

    labels, sq = _nearest(x, c)
    inertia = float(sq.sum() if w is None else (sq * w).sum())
    history = [inertia]
    repairs = 0
    it = 0
    while it < cfg.max_iter:
        it += 1
        c, n_empty = _update(x, labels, sq, c, w)
        repairs += n_empty
        labels, sq = _nearest(x, c)
        new_inertia = float(sq.sum() if w is None else (sq * w).sum())
        history.append(new_inertia)
        prev, inertia = inertia, new_inertia
        if prev - inertia <= cfg.tol * prev:
            break
    return ClusterResult(
        k=c.shape[0], centroids=c, labels=labels, inertia=inertia, iterations=it,
        inertia_history=history, diagnostics={"empty_repairs": repairs},
    )


def kmeans(data: ArrayLike, cfg: KMeansConfig, weights: Optional[np.ndarray] = None) -> ClusterResult:
    """k-means++ followed by Lloyd, best of ``cfg.n_init`` restarts.

    Restart ``r`` draws from its own stream keyed on ``(cfg.seed, r)``, so the
    result depends only on the data and the config.
    """
    x = as_points(data)
    best = None
    for r in range(cfg.n_init):
        rng = _rng.stream(cfg.seed, _rng.RESTART, r)
        res = lloyd(x, kmeanspp_init(x, cfg.k, rng, weights), cfg, weights)
        if best is None or res.inertia < best.inertia:
            best = res
    best.diagnostics["n_init"] = cfg.n_init
    return best
