"""Classical cluster-number indices: CH, Jump, Hartigan, Curvature,
Silhouette, Gap and cross-validated instability (CVa).

All of them except Gap's reference datasets and CVa's training splits read
J(k) and labelings from one shared :class:`Sweep`, so two indices computed on
the same sweep see identical k-means solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from . import _rng
from ._parallel import ordered_map
from .core import ClusterResult, DataError, as_points
from .kmeans import KMeansConfig, assign, kmeans
from .metrics import contingency, _pairs, silhouette_coefficient

METHODS = ("ch", "jump", "hartigan", "curvature", "silhouette", "gap", "cva")
DEFAULT_RESTARTS = 5
HARTIGAN_THRESHOLD = 10.0
# Full pairwise distance matrices are cached for silhouette up to this many points.
_SILHOUETTE_CACHE_LIMIT = 4000


@dataclass
class IndexCurve:
    method: str
    ks: list
    values: list  # NaN marks k where the index is undefined
    selected_k: Optional[int]
    flags: dict = field(default_factory=dict)
    applicable: bool = True

    def to_dict(self) -> dict:
        return {
            "method": self.method, "ks": list(self.ks),
            "values": [None if not math.isfinite(v) else v for v in self.values],
            "selected_k": self.selected_k, "flags": dict(self.flags), "applicable": self.applicable,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IndexCurve":
        vals = [float("nan") if v is None else float(v) for v in d["values"]]
        return cls(d["method"], [int(k) for k in d["ks"]], vals, d["selected_k"],
                   dict(d.get("flags", {})), bool(d.get("applicable", True)))


class Sweep:
    """Best-of-``restarts`` k-means solutions for every k, computed on demand.

    The solution for k uses a stream keyed on ``(seed, k)`` so it does not
    depend on which other k were requested or in what order.
    """

    def __init__(self, data, seed: int = 0, restarts: int = DEFAULT_RESTARTS,
                 kmeans_cfg: Optional[KMeansConfig] = None, threads: int = 1):
        self.x = as_points(data)
        self.seed = seed
        self.restarts = restarts
        self.cfg = kmeans_cfg or KMeansConfig()
        self.threads = threads
        self._results: dict[int, ClusterResult] = {}

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def _fit(self, k: int) -> ClusterResult:
        seed = _rng.child_seed(_rng.stream(self.seed, _rng.KMEANS, k))
        cfg = KMeansConfig(k=k, max_iter=self.cfg.max_iter, tol=self.cfg.tol, seed=seed,
                           n_init=self.restarts)
        return kmeans(self.x, cfg)

    def ensure(self, ks) -> None:
        missing = [k for k in ks if k not in self._results]
        for k, res in zip(missing, ordered_map(self._fit, missing, self.threads)):
            self._results[k] = res

    def result(self, k: int) -> ClusterResult:
        self.ensure([k])
        return self._results[k]

    def J(self, k: int) -> float:
        return self.result(k).inertia


def _argmax(ks, values) -> Optional[int]:
    v = np.asarray(values, dtype=np.float64)
    if not np.any(np.isfinite(v) | np.isposinf(v)):
        return None
    v = np.where(np.isnan(v), -np.inf, v)
    return ks[int(np.argmax(v))]


def _argmin(ks, values) -> Optional[int]:
    v = np.asarray(values, dtype=np.float64)
    if not np.any(np.isfinite(v)):
        return None
    v = np.where(np.isnan(v), np.inf, v)
    return ks[int(np.argmin(v))]


def _sweep(data, sweep, seed, restarts, threads) -> Sweep:
    return sweep if sweep is not None else Sweep(data, seed=seed, restarts=restarts, threads=threads)


def ch_select(data=None, k_min: int = 2, k_max: int = 10, *, sweep: Optional[Sweep] = None,
              seed: int = 0, restarts: int = DEFAULT_RESTARTS, threads: int = 1) -> IndexCurve:
    """Calinski-Harabasz: between/within dispersion ratio, maximized."""
    sw = _sweep(data, sweep, seed, restarts, threads)
    ks = list(range(max(2, k_min), k_max + 1))
    sw.ensure([1, *ks])
    n, j1 = sw.n, sw.J(1)
    vals, flags = [], {}
    for k in ks:
        jk = sw.J(k)
        if n - k <= 0:
            vals.append(float("nan"))
            flags[k] = "n <= k"
        elif jk == 0:
            vals.append(float("inf"))
            flags[k] = "zero within-cluster dispersion"
        else:
            vals.append(((j1 - jk) / (k - 1)) / (jk / (n - k)))
    return IndexCurve("ch", ks, vals, _argmax(ks, vals), flags)


def jump_select(data=None, k_min: int = 1, k_max: int = 10, power: Optional[float] = None, *,
                sweep: Optional[Sweep] = None, seed: int = 0, restarts: int = DEFAULT_RESTARTS,
                threads: int = 1) -> IndexCurve:
    """Jump method on transformed distortion ``J(k) ** -power`` (default power d/2).

    When the transform overflows or underflows double precision the method is
    reported as inapplicable, with no selected k.
    """
    sw = _sweep(data, sweep, seed, restarts, threads)
    y = sw.x.shape[1] / 2.0 if power is None else float(power)
    ks = list(range(max(1, k_min), k_max + 1))
    prev_ks = [k - 1 for k in ks if k - 1 >= 1]
    sw.ensure(sorted(set(ks) | set(prev_ks)))
    try:
        with np.errstate(over="raise", under="raise", divide="raise", invalid="raise"):
            def transformed(k):
                return 0.0 if k == 0 else float(np.power(np.float64(sw.J(k)), -y))
            vals = [transformed(k) - transformed(k - 1) for k in ks]
    except FloatingPointError as exc:
        nan = [float("nan")] * len(ks)
        return IndexCurve("jump", ks, nan, None, {"error": f"floating-point {exc}"}, applicable=False)
    return IndexCurve("jump", ks, vals, _argmax(ks, vals), {})


def hartigan_select(data=None, k_min: int = 1, k_max: int = 10, threshold: float = HARTIGAN_THRESHOLD, *,
                    sweep: Optional[Sweep] = None, seed: int = 0, restarts: int = DEFAULT_RESTARTS,
                    threads: int = 1) -> IndexCurve:
    """Hartigan: smallest k with ``(J(k)/J(k+1) - 1)(n - k - 1) <= threshold``."""
    sw = _sweep(data, sweep, seed, restarts, threads)
    ks = list(range(max(1, k_min), k_max + 1))
    ks = [k for k in ks if k + 1 <= sw.n]
    sw.ensure(sorted(set(ks) | {k + 1 for k in ks}))
    vals, flags = [], {}
    for k in ks:
        nxt = sw.J(k + 1)
        if nxt == 0:
            vals.append(float("nan"))
            flags[k] = "J(k+1) = 0"
        else:
            vals.append((sw.J(k) / nxt - 1.0) * (sw.n - k - 1))
    selected = next((k for k, v in zip(ks, vals) if math.isfinite(v) and v <= threshold), None)
    if selected is None:
        selected = ks[-1]
        flags["selection"] = "no threshold crossing"
    return IndexCurve("hartigan", ks, vals, selected, flags)


def curvature_select(data=None, k_min: int = 2, k_max: int = 10, literal_denominator: bool = False, *,
                     sweep: Optional[Sweep] = None, seed: int = 0, restarts: int = DEFAULT_RESTARTS,
                     threads: int = 1) -> IndexCurve:
    """Ratio of successive distortion drops ``(J(k-1) - J(k)) / (J(k) - J(k+1))``, maximized.

    ``literal_denominator`` uses ``J(k) - (k + 1)`` instead. A flat distortion
    curve (0/0) scores 0; a non-positive denominator marks k invalid.
    """
    sw = _sweep(data, sweep, seed, restarts, threads)
    ks = list(range(max(2, k_min), k_max + 1))
    if not literal_denominator:
        ks = [k for k in ks if k + 1 <= sw.n]
    needed = {k - 1 for k in ks} | set(ks)
    if not literal_denominator:
        needed |= {k + 1 for k in ks}
    sw.ensure(sorted(needed))
    vals, flags = [], {}
    for k in ks:
        num = sw.J(k - 1) - sw.J(k)
        den = sw.J(k) - (k + 1) if literal_denominator else sw.J(k) - sw.J(k + 1)
        if num == 0 and den == 0:
            vals.append(0.0)
        elif den <= 0:
            vals.append(float("nan"))
            flags[k] = "non-positive denominator"
        else:
            vals.append(num / den)
    return IndexCurve("curvature", ks, vals, _argmax(ks, vals), flags)


def silhouette_select(data=None, k_min: int = 2, k_max: int = 10, *, sweep: Optional[Sweep] = None,
                      seed: int = 0, restarts: int = DEFAULT_RESTARTS, threads: int = 1) -> IndexCurve:
    """Mean silhouette of each k-means labeling, maximized."""
    sw = _sweep(data, sweep, seed, restarts, threads)
    ks = list(range(max(2, k_min), k_max + 1))
    sw.ensure(ks)
    dist = cdist(sw.x, sw.x) if sw.n <= _SILHOUETTE_CACHE_LIMIT else None
    vals, flags = [], {}
    for k in ks:
        labels = sw.result(k).labels
        if np.unique(labels).size < 2:
            vals.append(float("nan"))
            flags[k] = "fewer than 2 populated clusters"
        else:
            vals.append(silhouette_coefficient(sw.x, labels, dist))
    return IndexCurve("silhouette", ks, vals, _argmax(ks, vals), flags)


def reference_dataset(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample over the per-feature bounding box of ``x``."""
    lo, hi = x.min(axis=0), x.max(axis=0)
    return lo + rng.random(x.shape) * (hi - lo)


def gap_select(data=None, k_min: int = 1, k_max: int = 10, B: int = 10, *, sweep: Optional[Sweep] = None,
               seed: int = 0, restarts: int = DEFAULT_RESTARTS, threads: int = 1) -> IndexCurve:
    """Gap statistic with uniform box references; smallest k with
    ``Gap(k) >= Gap(k+1) - s(k+1)``. Values reported are Gap(k)."""
    if B < 1:
        raise ValueError("B must be >= 1")
    sw = _sweep(data, sweep, seed, restarts, threads)
    ks = list(range(max(1, k_min), k_max + 1))
    scan = [k for k in ks + [k_max + 1] if k <= sw.n]
    sw.ensure(scan)
    refs = [Sweep(reference_dataset(sw.x, _rng.stream(sw.seed, _rng.REFERENCE, b)),
                  seed=_rng.child_seed(_rng.stream(sw.seed, _rng.REFERENCE, b, 1)),
                  restarts=sw.restarts, kmeans_cfg=sw.cfg) for b in range(B)]
    ordered_map(lambda r: r.ensure(scan), refs, threads)
    observed = {k: sw.J(k) for k in scan}
    reference = {k: [r.J(k) for r in refs] for k in scan}
    gap, s, selected, flags = gap_statistic(observed, reference, ks)
    return IndexCurve("gap", ks, [gap.get(k, float("nan")) for k in ks], selected, flags)


def gap_statistic(observed: dict, reference: dict, ks: list) -> tuple[dict, dict, int, dict]:
    """Gap values, their standard errors and the selected k.

    ``observed[k]`` is J(k) of the data and ``reference[k]`` the list of J(k)
    over the B reference datasets. ``s(k)`` is the population standard
    deviation of the reference log J(k) times ``sqrt(1 + 1/B)``.
    """
    gap, s, flags = {}, {}, {}
    for k, jk in observed.items():
        refs = np.asarray(reference[k], dtype=np.float64)
        if jk <= 0 or np.any(refs <= 0):
            gap[k], s[k] = float("nan"), float("nan")
            flags[k] = "zero dispersion"
            continue
        logs = np.log(refs)
        gap[k] = float(np.mean(logs) - math.log(jk))
        s[k] = float(np.std(logs) * math.sqrt(1.0 + 1.0 / refs.size))
    selected = None
    for k in ks:
        if k + 1 in gap and math.isfinite(gap[k]) and math.isfinite(gap[k + 1]) \
                and gap[k] >= gap[k + 1] - s[k + 1]:
            selected = k
            break
    if selected is None:
        selected = ks[-1]
        flags["selection"] = "no k satisfied the gap criterion"
    return gap, s, selected, flags


def disagreement_pairs(a, b) -> int:
    """Number of point pairs grouped together by exactly one of two labelings."""
    table = contingency(a, b)
    return _pairs(table.sum(axis=1)) + _pairs(table.sum(axis=0)) - 2 * _pairs(table)


def cva_select(data=None, k_min: int = 2, k_max: int = 10, C: int = 10, m: Optional[int] = None, *,
               seed: int = 0, restarts: int = DEFAULT_RESTARTS, threads: int = 1,
               sweep: Optional[Sweep] = None) -> IndexCurve:
    """Cross-validated instability, minimized over k >= 2.

    Each of ``C`` random permutations yields two disjoint training sets of size
    ``m`` (default n // 3) and a validation set of the rest. Two k-means models
    are fit, the validation points are labeled by both, and the fraction of
    validation pairs on which they disagree is averaged over permutations.
    """
    x = sweep.x if sweep is not None else as_points(data)
    n = x.shape[0]
    m = n // 3 if m is None else int(m)
    if C < 1:
        raise ValueError("C must be >= 1")
    if m < 1 or n < 2 * m + 2:
        raise DataError(f"split size m={m} too large for n={n} (need n >= 2m + 2)")
    ks = list(range(max(2, k_min), k_max + 1))
    if ks and ks[-1] > m:
        raise DataError(f"k_max={k_max} exceeds the training split size {m}")
    n_val = n - 2 * m
    total_pairs = n_val * (n_val - 1) // 2

    def one(c):
        perm = _rng.stream(seed, _rng.PERMUTE, c).permutation(n)
        train = (x[perm[:m]], x[perm[m:2 * m]])
        val = x[perm[2 * m:]]
        out = []
        for k in ks:
            labels = []
            for half, tr in enumerate(train):
                s = _rng.child_seed(_rng.stream(seed, _rng.KMEANS, k, c, half))
                model = kmeans(tr, KMeansConfig(k=k, seed=s, n_init=restarts))
                labels.append(assign(val, model.centroids))
            out.append(disagreement_pairs(labels[0], labels[1]) / total_pairs)
        return out

    per_perm = np.array(ordered_map(one, range(C), threads))
    vals = [float(v) for v in per_perm.mean(axis=0)]
    return IndexCurve("cva", ks, vals, _argmin(ks, vals), {"m": m, "C": C})


def select(method: str, data, k_min: Optional[int] = None, k_max: int = 10, *, seed: int = 0,
           restarts: int = DEFAULT_RESTARTS, threads: int = 1, sweep: Optional[Sweep] = None,
           **options) -> IndexCurve:
    """Dispatch to ``<method>_select`` with a shared sweep."""
    funcs = {
        "ch": ch_select, "jump": jump_select, "hartigan": hartigan_select,
        "curvature": curvature_select, "silhouette": silhouette_select,
        "gap": gap_select, "cva": cva_select,
    }
    if method not in funcs:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if sweep is None and method != "cva":
        sweep = Sweep(data, seed=seed, restarts=restarts, threads=threads)
    kwargs = dict(k_max=k_max, seed=seed, restarts=restarts, threads=threads, sweep=sweep, **options)
    if k_min is not None:
        kwargs["k_min"] = k_min
    return funcs[method](data, **kwargs)
