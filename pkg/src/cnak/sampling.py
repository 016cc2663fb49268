"""Sample-size planning for the subsampling step.

The sample size comes from the normal-approximation formula for estimating
a mean to within a marginal error ``c``, with the finite-population
correction. The variance is the largest eigenvalue of the sample covariance
and ``c`` is picked from the top two eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import DataError, Dataset, as_points

Z_95 = 1.96
EPSILON = 10.0
# Largest eigenvalues below this count as "small spread" and get a fixed c.
SMALL_SPREAD = 60.0


def default_tau(d: int) -> int:
    """Root order used for ``c = lambda_max ** (1 / tau)``: 16 below 4-d, else 8."""
    return 16 if d < 4 else 8


def covariance_eigenvalues(data) -> np.ndarray:
    """Eigenvalues of the mean-centered covariance (1/(n-1)), descending, clamped at 0."""
    x = as_points(data)
    n = x.shape[0]
    if n < 2:
        raise DataError("need at least 2 points for a covariance matrix")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    eigs = np.linalg.eigvalsh(cov)[::-1]
    return np.maximum(eigs, 0.0)


def marginal_error(eigs, tau: int, epsilon: float = EPSILON) -> float:
    """Marginal error ``c`` from the descending eigenvalues.

    Small-spread data (lambda_1 < 60) gets 0.6 when the top eigenvalue stands
    out by more than ``epsilon`` and 0.2 when the top two are within
    ``epsilon``; otherwise ``c = lambda_1 ** (1 / tau)``.
    """
    eigs = np.asarray(eigs, dtype=np.float64).ravel()
    if eigs.size == 0:
        raise ValueError("eigenvalue list is empty")
    if tau < 1:
        raise ValueError(f"tau must be positive, got {tau}")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    l1 = float(eigs[0])
    l2 = float(eigs[1]) if eigs.size > 1 else 0.0
    if l1 < SMALL_SPREAD:
        return 0.6 if l1 - l2 > epsilon else 0.2
    return l1 ** (1.0 / tau)


def sample_size(N: int, variance: float, c: float, z_beta: float = Z_95) -> int:
    """``ceil(g / (1 + g / N))`` with ``g = (z / c)^2 * variance``, clamped to [1, N]."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if variance < 0:
        raise ValueError("variance must be >= 0")
    if c <= 0:
        raise ValueError("c must be positive")
    g1 = (z_beta / c) ** 2 * variance
    gamma = math.ceil(g1 / (1.0 + g1 / N))
    return int(min(max(gamma, 1), N))


def draw_indices(n: int, gamma: int, rng: np.random.Generator) -> np.ndarray:
    """``gamma`` distinct row indices, uniform without replacement."""
    if not 1 <= gamma <= n:
        raise DataError(f"sample size {gamma} outside [1, {n}]")
    return rng.choice(n, size=gamma, replace=False)


def draw_sample(data: Dataset, gamma: int, rng: np.random.Generator) -> Dataset:
    return data.subset(draw_indices(data.n, gamma, rng))


@dataclass(frozen=True)
class SampleSizePlan:
    n: int
    lambda_max: float
    lambda_2: float
    tau: int
    c: float
    z_beta: float
    gamma: int
    fraction: float

    def to_dict(self) -> dict:
        return asdict(self)


def plan_sample_size(data, tau: Optional[int] = None, epsilon: float = EPSILON,
                     z_beta: float = Z_95) -> SampleSizePlan:
    x = as_points(data)
    n, d = x.shape
    tau = default_tau(d) if tau is None else int(tau)
    eigs = covariance_eigenvalues(x)
    c = marginal_error(eigs, tau, epsilon)
    gamma = sample_size(n, float(eigs[0]), c, z_beta)
    return SampleSizePlan(
        n=n, lambda_max=float(eigs[0]), lambda_2=float(eigs[1]) if d > 1 else 0.0,
        tau=tau, c=c, z_beta=z_beta, gamma=gamma, fraction=gamma / n,
    )
