"""External clustering-quality metrics and the gs-score.

All label-comparison metrics go through one contingency table, so they are
invariant to relabeling of either argument.
"""

from __future__ import annotations

import math
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import cdist

from .core import DataError, Dataset, as_labels, as_points


def contingency(a, b) -> np.ndarray:
    """Return the ``(#classes(a), #classes(b))`` co-occurrence count table."""
    a = as_labels(a)
    b = as_labels(b)
    if a.shape[0] != b.shape[0]:
        raise DataError(f"labelings differ in length: {a.shape[0]} vs {b.shape[0]}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max(initial=-1) + 1, ib.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _pairs(x) -> int:
    x = np.asarray(x, dtype=np.int64)
    return int((x * (x - 1) // 2).sum())


def adjusted_rand_index(a, b) -> float:
    """Hubert-Arabie adjusted Rand index. Values <= 0 are returned as-is."""
    table = contingency(a, b)
    n = int(table.sum())
    index = _pairs(table)
    sum_a = _pairs(table.sum(axis=1))
    sum_b = _pairs(table.sum(axis=0))
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        # Both labelings trivial in the same way (all one cluster or all singletons).
        return 1.0
    return float((index - expected) / (maximum - expected))


def _entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0].astype(np.float64)
    n = counts.sum()
    if n == 0:
        return 0.0
    return float(-np.sum(counts / n * (np.log(counts) - math.log(n))))


def _mutual_info(table: np.ndarray) -> float:
    n = float(table.sum())
    rows = table.sum(axis=1).astype(np.float64)
    cols = table.sum(axis=0).astype(np.float64)
    i, j = np.nonzero(table)
    nij = table[i, j].astype(np.float64)
    mi = np.sum(nij / n * (np.log(nij) + math.log(n) - np.log(rows[i]) - np.log(cols[j])))
    return max(float(mi), 0.0)


def normalized_mutual_info(a, b) -> float:
    """Mutual information over the geometric mean of the two entropies.

    Two single-cluster labelings score 1.0, keeping "identical partitions
    score 1" true without exception.
    """
    table = contingency(a, b)
    ha = _entropy(table.sum(axis=1))
    hb = _entropy(table.sum(axis=0))
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    return min(1.0, _mutual_info(table) / math.sqrt(ha * hb))


def homogeneity(truth, pred) -> float:
    """1 - H(truth | pred) / H(truth); each predicted cluster holds one class when 1."""
    table = contingency(truth, pred)
    h_truth = _entropy(table.sum(axis=1))
    if h_truth == 0.0:
        return 1.0
    h_cond = _entropy_conditional(table)
    return float(max(0.0, 1.0 - h_cond / h_truth))


def _entropy_conditional(table: np.ndarray) -> float:
    # H(rows | columns)
    n = float(table.sum())
    cols = table.sum(axis=0).astype(np.float64)
    i, j = np.nonzero(table)
    nij = table[i, j].astype(np.float64)
    return float(-np.sum(nij / n * (np.log(nij) - np.log(cols[j]))))


def completeness(truth, pred) -> float:
    return homogeneity(pred, truth)


def homogeneity_completeness(truth, pred) -> tuple[float, float]:
    return homogeneity(truth, pred), completeness(truth, pred)


def silhouette_samples(
    data: Union[Dataset, np.ndarray],
    labels,
    distances: Optional[np.ndarray] = None,
    chunk_size: int = 256,
) -> np.ndarray:
    """Per-point silhouette ``(b - a) / max(a, b)`` with Euclidean distances.

    Points alone in their cluster get 0. ``distances`` may hold a precomputed
    full distance matrix; otherwise rows are processed in chunks.
    """
    x = as_points(data)
    labels = as_labels(labels)
    if labels.shape[0] != x.shape[0]:
        raise DataError(f"labels length {labels.shape[0]} != number of points {x.shape[0]}")
    uniq, inv = np.unique(labels, return_inverse=True)
    k = uniq.size
    if k < 2:
        raise DataError("silhouette undefined: labeling has fewer than 2 clusters")
    n = x.shape[0]
    sizes = np.bincount(inv, minlength=k).astype(np.float64)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), inv] = 1.0
    out = np.empty(n)
    for start in range(0, n, chunk_size):
        stop = min(n, start + chunk_size)
        if distances is not None:
            dist = distances[start:stop]
        else:
            dist = cdist(x[start:stop], x)
        sums = dist @ onehot
        own = inv[start:stop]
        rows = np.arange(stop - start)
        own_size = sizes[own]
        with np.errstate(invalid="ignore", divide="ignore"):
            a = sums[rows, own] / (own_size - 1)
            mean_other = sums / sizes
        mean_other[rows, own] = np.inf
        b = mean_other.min(axis=1)
        denom = np.maximum(a, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(denom > 0, (b - a) / denom, 0.0)
        s[own_size == 1] = 0.0
        out[start:stop] = s
    return out


def silhouette_coefficient(data, labels, distances: Optional[np.ndarray] = None) -> float:
    """Mean silhouette over all points, in [-1, 1]."""
    return float(np.mean(silhouette_samples(data, labels, distances)))


def gs_score(k_true: int, k_pred: int, sigma: float = 2.0) -> float:
    """Gaussian similarity between predicted and true cluster counts."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return math.exp(-(((k_true - k_pred) / sigma) ** 2))


def all_metrics(data, truth, pred, k_true: Optional[int] = None, k_pred: Optional[int] = None) -> dict:
    """Every metric reported per run; silhouette is None when undefined."""
    h, c = homogeneity_completeness(truth, pred)
    out = {
        "ari": adjusted_rand_index(truth, pred),
        "nmi": normalized_mutual_info(truth, pred),
        "homogeneity": h,
        "completeness": c,
        "silhouette": None,
    }
    if data is not None:
        try:
            out["silhouette"] = silhouette_coefficient(data, pred)
        except DataError:
            pass
    if k_true is not None and k_pred is not None:
        out["gs"] = gs_score(k_true, k_pred)
    return out
