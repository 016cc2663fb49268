"""Deterministic synthetic benchmark datasets.

Every dataset is a function of ``(id, seed)``. Each cluster draws from its
own stream, so generation does not depend on the order clusters are built.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _rng
from .core import Dataset, as_points

SIM2_MEANS = [(0, 0), (10, 10), (10, -10), (-10, 10), (-10, -10)]
SIM3_MEANS = [(0, 0), (2, 2), (2, -2), (-2, 2), (-2, -2)]
# Imbalanced layout: three large clusters 8 apart near the origin and five
# small ones spaced 100 apart far to the right. The closest pair of means is
# 8 apart; the wide spacing of the small clusters mirrors the very large
# spread of the classic unbalanced benchmark.
SIM4_MEANS = [(0, 0), (8, 0), (4, 4 * np.sqrt(3)),
              (200, 0), (300, 0), (200, 100), (300, 100), (250, 200)]
SIM4_SIZES = [2000, 2000, 2000, 100, 100, 100, 100, 100]
SIM6_MEANS = [(0, 8), (2, 8), (5, 5), (8, 5), (11, 7), (13, 7)]
SIM7_CORRELATIONS = [0.0, 0.0, 0.3, 0.3, 0.7, 0.7]
SIM8_MEANS = [(0, 0), (3, 0), (1, 3), (12, 0), (15, 0), (14, 3), (6, 7), (9, 7), (8, 10)]
SIM10_MEANS = [(1, 10, 30, 50), (10, 30, 50, 70), (30, 50, 70, 90), (50, 70, 90, 110)]
SIM11_MEANS = [(100, 50, 0, 150, 150), (150, 100, 50, 0, 200),
               (50, 0, 150, 200, 100), (0, 200, 100, 50, 150)]

OVERLAP_SIDE = 6.0
OVERLAP_SIZE = 100
DIST_LEVELS = (6, 4, 2, 1)
COV_LEVELS = (1, 5, 10, 15)

DIMS_CLUSTERS = 16
DIMS_PER_CLUSTER = 64
DIMS_RANGE = 255.0
DIMS_STD = 5.0

SIM_IDS = tuple(f"sim{i}" for i in range(1, 12)) + \
    tuple(f"dist{v}" for v in DIST_LEVELS) + ("covI", "cov5I", "cov10I", "cov15I")


@dataclass(frozen=True)
class SimSpec:
    id: str
    seed: int = 0


def _gaussians(seed: int, means, sizes, covs=None) -> tuple[np.ndarray, np.ndarray]:
    means = np.asarray(means, dtype=np.float64)
    d = means.shape[1]
    parts, labels = [], []
    for j, (mu, m) in enumerate(zip(means, sizes)):
        rng = _rng.stream(seed, _rng.CLUSTER, j)
        if covs is None:
            pts = mu + rng.standard_normal((m, d))
        else:
            chol = np.linalg.cholesky(np.asarray(covs[j], dtype=np.float64))
            pts = mu + rng.standard_normal((m, d)) @ chol.T
        parts.append(pts)
        labels.append(np.full(m, j, dtype=np.int64))
    return np.vstack(parts), np.concatenate(labels)


def _sim5(seed: int) -> tuple[np.ndarray, np.ndarray]:
    line = np.repeat(np.linspace(-0.5, 0.5, 100)[:, None], 3, axis=1)
    parts = []
    for j, shift in enumerate((0.0, 10.0)):
        rng = _rng.stream(seed, _rng.CLUSTER, j)
        parts.append(line + shift + rng.normal(0.0, 0.1, line.shape))
    return np.vstack(parts), np.repeat([0, 1], 100)


def sim9_means(seed: int, k: int = 30, low: float = 0.0, high: float = 50.0,
               min_sep: float = 1.0, max_attempts: int = 1000) -> np.ndarray:
    """Uniform random means, redrawn until every pair is at least ``min_sep`` apart."""
    for attempt in range(max_attempts):
        m = _rng.stream(seed, _rng.MEANS, attempt).uniform(low, high, (k, 2))
        diff = m[:, None, :] - m[None, :, :]
        dist = np.sqrt((diff ** 2).sum(-1))
        if dist[np.triu_indices(k, 1)].min() >= min_sep:
            return m
    raise RuntimeError(f"no mean layout with separation {min_sep} after {max_attempts} attempts")


def overlap_series(kind: str, level, seed: int = 0) -> Dataset:
    """Four unit Gaussians on a square of side 6.

    ``distance``: the cluster at (6, 0) moves to (level, 0), so two means are
    ``level`` apart. ``covariance``: the two clusters at x = 6 get covariance
    ``level * I``.
    """
    means = [(0.0, 0.0), (OVERLAP_SIDE, 0.0), (0.0, OVERLAP_SIDE), (OVERLAP_SIDE, OVERLAP_SIDE)]
    covs = [np.eye(2)] * 4
    if kind == "distance":
        if level not in DIST_LEVELS:
            raise ValueError(f"distance level must be one of {DIST_LEVELS}, got {level}")
        means[1] = (float(level), 0.0)
        name = f"dist{level}"
    elif kind == "covariance":
        if level not in COV_LEVELS:
            raise ValueError(f"covariance level must be one of {COV_LEVELS}, got {level}")
        covs = [np.eye(2), level * np.eye(2), np.eye(2), level * np.eye(2)]
        name = "covI" if level == 1 else f"cov{level}I"
    else:
        raise ValueError(f"kind must be 'distance' or 'covariance', got {kind!r}")
    x, y = _gaussians(seed, means, [OVERLAP_SIZE] * 4, covs)
    return Dataset(x, y, name)


def dims_fixture(d: int, seed: int = 0, k: int = DIMS_CLUSTERS, per_cluster: int = DIMS_PER_CLUSTER,
                 std: float = DIMS_STD) -> Dataset:
    """``k`` isotropic Gaussians in ``d`` dimensions, means uniform in [0, 255]^d."""
    means = _rng.stream(seed, _rng.MEANS, d).uniform(0.0, DIMS_RANGE, (k, d))
    x, y = _gaussians(seed, means, [per_cluster] * k)
    x = means[y] + (x - means[y]) * std
    return Dataset(x, y, f"dim{d}")


def generate(spec, seed: Optional[int] = None, per_cluster: Optional[int] = None) -> Dataset:
    """Build a benchmark dataset from a :class:`SimSpec` or an id string.

    ``per_cluster`` overrides the cluster size of sim10 and sim11 for
    scaled-down runs.
    """
    if isinstance(spec, SimSpec):
        sid, seed = spec.id, spec.seed if seed is None else seed
    else:
        sid = str(spec)
    seed = 0 if seed is None else int(seed)
    sid = sid.replace("-", "").lower()
    if sid == "sim1":
        x = _rng.stream(seed, _rng.CLUSTER, 0).random((200, 10))
        y = np.zeros(200, dtype=np.int64)
    elif sid == "sim2":
        x, y = _gaussians(seed, SIM2_MEANS, [100] * 5)
    elif sid == "sim3":
        x, y = _gaussians(seed, SIM3_MEANS, [100] * 5)
    elif sid == "sim4":
        x, y = _gaussians(seed, SIM4_MEANS, SIM4_SIZES)
    elif sid == "sim5":
        x, y = _sim5(seed)
    elif sid == "sim6":
        x, y = _gaussians(seed, SIM6_MEANS, [100] * 6)
    elif sid == "sim7":
        covs = [np.array([[1.0, r], [r, 1.0]]) for r in SIM7_CORRELATIONS]
        x, y = _gaussians(seed, SIM6_MEANS, [100] * 6, covs)
    elif sid == "sim8":
        x, y = _gaussians(seed, SIM8_MEANS, [100] * 9)
    elif sid == "sim9":
        x, y = _gaussians(seed, sim9_means(seed), [25] * 30)
    elif sid == "sim10":
        x, y = _gaussians(seed, SIM10_MEANS, [per_cluster or 50500] * 4)
    elif sid == "sim11":
        x, y = _gaussians(seed, SIM11_MEANS, [per_cluster or 2_000_000] * 4)
    elif re.fullmatch(r"dist\d+", sid):
        return overlap_series("distance", int(sid[4:]), seed)
    elif sid == "covi":
        return overlap_series("covariance", 1, seed)
    elif re.fullmatch(r"cov\d+i", sid):
        return overlap_series("covariance", int(sid[3:-1]), seed)
    elif re.fullmatch(r"dim\d+", sid):
        return dims_fixture(int(sid[3:]), seed)
    else:
        raise ValueError(f"unknown simulation id {spec!r}")
    return Dataset(x, y, sid)


def add_noise(data: Dataset, kind: str, level: float, rng: np.random.Generator) -> Dataset:
    """Additive white Gaussian noise.

    ``cov_scale``: noise covariance ``level * I``. ``snr``: ``level`` in dB,
    with the noise rescaled so ``||S||_F / ||N||_F = 10 ** (level / 20)`` exactly.
    """
    x = as_points(data)
    if kind == "cov_scale":
        if level < 0:
            raise ValueError("covariance scale must be >= 0")
        if level == 0:
            return Dataset(x.copy(), data.labels, data.name)
        noisy = x + rng.standard_normal(x.shape) * np.sqrt(level)
    elif kind == "snr":
        w = rng.standard_normal(x.shape)
        ratio = 10.0 ** (level / 20.0)
        noisy = x + w * (np.linalg.norm(x) / (np.linalg.norm(w) * ratio))
    else:
        raise ValueError(f"kind must be 'cov_scale' or 'snr', got {kind!r}")
    return Dataset(noisy, data.labels, data.name)
