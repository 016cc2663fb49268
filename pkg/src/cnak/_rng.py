"""Counter-based random streams keyed by (seed, *path).

Every stochastic task (one trial, one restart, one reference dataset) gets
its own generator derived from the run seed and integer keys that identify
the task. Streams therefore do not depend on execution order, which is what
makes thread-parallel runs reproducible.
"""

from __future__ import annotations

import numpy as np

# Integer tags that namespace the streams of different pipeline stages.
SAMPLE = 1
KMEANS = 2
RESTART = 3
REFERENCE = 4
PERMUTE = 5
BOOTSTRAP = 6
ATTRIBUTES = 7
CLUSTER = 8
NOISE = 9
MEANS = 10


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return an independent Philox generator for ``(seed, *path)``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(p) for p in path)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def child_seed(rng: np.random.Generator) -> int:
    """Draw a 63-bit seed from ``rng`` for APIs that take an integer seed."""
    return int(rng.integers(0, 2**63 - 1))
