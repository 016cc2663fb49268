"""Cluster-number estimation by centroid matching across random subsamples.

For every candidate k, T samples are drawn without replacement and clustered
with k-means++ and Lloyd. Every pair of centroid sets is matched at minimum
Euclidean cost; the score of k is the mean cost over the T(T-1)/2 pairs. The
selected k minimizes the score. The final clustering groups the matched
centroids of all samples into k cells (matching against one reference
sample), averages each cell and assigns every point to the nearest mean.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Optional, Union

import numpy as np

from . import _rng
from ._parallel import ordered_map
from .core import ClusterResult, DataError, as_points
from .kmeans import KMeansConfig, assign, kmeans, within_cluster_ss
from .matching import match_centroids
from .sampling import EPSILON, Z_95, draw_indices, plan_sample_size

BASES = ("per_k", "raw")


@dataclass(frozen=True)
class CnakConfig:
    k_min: int = 1
    k_max: int = 10
    trials: int = 50
    sample_fraction: Union[str, float] = "auto"
    seed: int = 0
    # Two restarts per sample keep the per-sample solutions from settling in
    # poor local optima without letting every sample find the same stable but
    # wrong split of an elongated cluster.
    kmeans: KMeansConfig = field(default_factory=lambda: KMeansConfig(n_init=2))
    threads: int = 1
    # Selection basis: "per_k" divides the pair-mean cost by k (mean distance
    # between matched centroids); "raw" uses the pair-mean cost itself.
    basis: str = "per_k"
    reference: int = 0
    tau: Optional[int] = None
    z_beta: float = Z_95
    epsilon: float = EPSILON

    def __post_init__(self):
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError(f"need 1 <= k_min <= k_max, got {self.k_min}, {self.k_max}")
        if self.trials < 2:
            raise ValueError("trials must be >= 2")
        if self.sample_fraction != "auto":
            f = float(self.sample_fraction)
            if not 0.0 < f <= 1.0:
                raise ValueError(f"sample_fraction must be in (0, 1] or 'auto', got {self.sample_fraction}")
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}")
        if not 0 <= self.reference < self.trials:
            raise ValueError("reference must index one of the trials")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


def resolve_sample_size(data, cfg: CnakConfig) -> int:
    x = as_points(data)
    n = x.shape[0]
    if cfg.sample_fraction == "auto":
        gamma = plan_sample_size(x, cfg.tau, cfg.epsilon, cfg.z_beta).gamma
    else:
        gamma = min(n, max(1, math.ceil(float(cfg.sample_fraction) * n)))
    return gamma


@dataclass
class ScoreCurve:
    """Score of every scanned k. ``raw`` is the pair-mean matching cost and
    ``per_k`` the same divided by k; ``basis`` names the one used to select."""

    ks: list
    raw: list
    per_k: list
    basis: str = "per_k"
    sample_size: int = 0

    @property
    def scores(self) -> list:
        return self.per_k if self.basis == "per_k" else self.raw

    @property
    def argmin_k(self) -> int:
        # First minimum, so ties favor the smaller k.
        return self.ks[int(np.argmin(self.scores))]

    @property
    def ranked(self) -> list:
        """k values ordered by ascending score."""
        order = np.argsort(np.asarray(self.scores), kind="stable")
        return [self.ks[i] for i in order]

    @property
    def local_minima(self) -> list:
        """k values whose score is below both neighbours, by ascending score."""
        s = self.scores
        mins = [
            i for i in range(len(s))
            if (i == 0 or s[i] < s[i - 1]) and (i == len(s) - 1 or s[i] < s[i + 1])
        ]
        mins.sort(key=lambda i: s[i])
        return [self.ks[i] for i in mins]

    def rows(self) -> list:
        return [(k, r, p) for k, r, p in zip(self.ks, self.raw, self.per_k)]

    def to_dict(self) -> dict:
        return {"ks": list(self.ks), "raw": list(self.raw), "per_k": list(self.per_k),
                "basis": self.basis, "sample_size": self.sample_size}

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreCurve":
        return cls([int(k) for k in d["ks"]], [float(v) for v in d["raw"]],
                   [float(v) for v in d["per_k"]], d.get("basis", "per_k"),
                   int(d.get("sample_size", 0)))


@dataclass
class KScore:
    k: int
    score: float
    sets: list
    pair_costs: np.ndarray
    to_reference: list

    @property
    def per_k(self) -> float:
        return self.score / self.k


@dataclass
class Bucket:
    cells: list  # cells[i] is a (T, d) array of the centroids matched to reference centroid i
    means: np.ndarray


def pair_score(sets: list, threads: int = 1) -> tuple[float, np.ndarray]:
    """Mean minimum matching cost over all unordered pairs of centroid sets.

    Equally optimal matchings can differ in the last bit of their float sums,
    so each set is put in a canonical row order and each pair in a canonical
    orientation before matching. With the total summed by ``math.fsum`` the
    score is then exactly independent of the order of ``sets`` and of the
    row order within each set.
    """
    pairs = list(combinations(range(len(sets)), 2))
    if not pairs:
        raise ValueError("need at least two centroid sets")
    canon = []
    for s in sets:
        s = np.atleast_2d(np.asarray(s, dtype=np.float64))
        s = np.ascontiguousarray(s[np.lexsort(s.T[::-1])])
        canon.append((s.tobytes(), s))

    def cost(p):
        (ka, a), (kb, b) = canon[p[0]], canon[p[1]]
        return match_centroids(a, b).total_cost if ka <= kb else match_centroids(b, a).total_cost

    costs = np.array(ordered_map(cost, pairs, threads))
    return math.fsum(costs) / len(pairs), costs


def _trial_centroids(x: np.ndarray, k: int, t: int, gamma: int, cfg: CnakConfig) -> np.ndarray:
    idx = draw_indices(x.shape[0], gamma, _rng.stream(cfg.seed, _rng.SAMPLE, k, t))
    km_seed = _rng.child_seed(_rng.stream(cfg.seed, _rng.KMEANS, k, t))
    return kmeans(x[idx], replace(cfg.kmeans, k=k, seed=km_seed)).centroids


def score_for_k(data, k: int, cfg: CnakConfig, gamma: Optional[int] = None) -> KScore:
    """Score one k: T subsamples, k-means on each, pairwise matching costs."""
    x = as_points(data)
    if gamma is None:
        gamma = resolve_sample_size(x, cfg)
    if gamma < k:
        raise DataError(f"sample size {gamma} is smaller than k={k}; raise the sample fraction")
    sets = ordered_map(lambda t: _trial_centroids(x, k, t, gamma, cfg), range(cfg.trials), cfg.threads)
    score, costs = pair_score(sets, cfg.threads)
    ref = sets[cfg.reference]
    others = [s for i, s in enumerate(sets) if i != cfg.reference]
    to_ref = ordered_map(lambda s: match_centroids(ref, s), others, cfg.threads)
    return KScore(k, score, sets, costs, to_ref)


def _sweep(data, cfg: CnakConfig) -> tuple[ScoreCurve, dict]:
    x = as_points(data)
    gamma = resolve_sample_size(x, cfg)
    if gamma < cfg.k_max:
        raise DataError(
            f"sample size {gamma} is smaller than k_max={cfg.k_max}; "
            "raise the sample fraction or lower k_max"
        )
    details = {}
    for k in range(cfg.k_min, cfg.k_max + 1):
        details[k] = score_for_k(x, k, cfg, gamma)
    ks = list(details)
    curve = ScoreCurve(ks, [details[k].score for k in ks], [details[k].per_k for k in ks],
                       cfg.basis, gamma)
    return curve, details


def estimate_k(data, cfg: CnakConfig) -> ScoreCurve:
    return _sweep(data, cfg)[0]


def bucketize(sets: list, matchings_to_reference: list, k: int, T: int) -> Bucket:
    """Group matched centroids into k cells and average each cell.

    ``sets[0]`` is the reference; ``matchings_to_reference[j]`` maps reference
    centroid i to centroid ``permutation[i]`` of ``sets[j + 1]``.
    """
    if len(sets) != T or len(matchings_to_reference) != T - 1:
        raise ValueError(f"expected {T} sets and {T - 1} matchings")
    arrs = [np.atleast_2d(np.asarray(s, dtype=np.float64)) for s in sets]
    if any(a.shape[0] != k for a in arrs):
        raise ValueError(f"every centroid set must have k={k} rows")
    stacked = np.empty((k, T, arrs[0].shape[1]))
    stacked[:, 0] = arrs[0]
    for j, m in enumerate(matchings_to_reference, start=1):
        stacked[:, j] = arrs[j][np.asarray(m.permutation)]
    return Bucket([stacked[i] for i in range(k)], stacked.mean(axis=1))


def cnak_cluster(data, cfg: CnakConfig) -> tuple[ScoreCurve, ClusterResult]:
    x = as_points(data)
    curve, details = _sweep(x, cfg)
    k = curve.argmin_k
    ks = details[k]
    ref = ks.sets[cfg.reference]
    others = [s for i, s in enumerate(ks.sets) if i != cfg.reference]
    bucket = bucketize([ref, *others], ks.to_reference, k, cfg.trials)
    labels = assign(x, bucket.means)
    result = ClusterResult(
        k=k, centroids=bucket.means, labels=labels,
        inertia=within_cluster_ss(x, bucket.means, labels),
        diagnostics={"sample_size": curve.sample_size, "trials": cfg.trials},
    )
    return curve, result


@dataclass
class StabilityReport:
    counts: dict
    mode: int
    frequency: int
    repeats: int

    def to_dict(self) -> dict:
        return {"counts": {str(k): v for k, v in self.counts.items()}, "mode": self.mode,
                "frequency": self.frequency, "repeats": self.repeats}


def stability_report(data, cfg: CnakConfig, repeats: int) -> StabilityReport:
    """Histogram of the selected k over ``repeats`` runs with seeds derived from cfg.seed."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    picks = []
    for r in range(repeats):
        seed = _rng.child_seed(_rng.stream(cfg.seed, _rng.CLUSTER, r))
        picks.append(estimate_k(data, replace(cfg, seed=seed)).argmin_k)
    counts = Counter(picks)
    # Most frequent k; ties go to the smaller k.
    mode = min(counts, key=lambda k: (-counts[k], k))
    return StabilityReport(dict(sorted(counts.items())), mode, counts[mode], repeats)
