"""Slow, direct reference implementations used as test oracles.

Nothing here shares code with the package: pair counts, entropies and
distances are computed with plain Python loops from their definitions.
"""

import itertools
import math


def pair_counts(a, b):
    """(n11, n10, n01, n00): pairs together in both, only a, only b, neither."""
    n11 = n10 = n01 = n00 = 0
    for i, j in itertools.combinations(range(len(a)), 2):
        sa, sb = a[i] == a[j], b[i] == b[j]
        if sa and sb:
            n11 += 1
        elif sa:
            n10 += 1
        elif sb:
            n01 += 1
        else:
            n00 += 1
    return n11, n10, n01, n00


def ari(a, b):
    n11, n10, n01, n00 = pair_counts(a, b)
    den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11)
    if den == 0:
        return 1.0
    return 2.0 * (n00 * n11 - n01 * n10) / den


def _counts(xs):
    out = {}
    for x in xs:
        out[x] = out.get(x, 0) + 1
    return out


def entropy(a):
    n = len(a)
    return -math.fsum(c / n * math.log(c / n) for c in _counts(a).values())


def mutual_info(a, b):
    n = len(a)
    ca, cb, cab = _counts(a), _counts(b), _counts(list(zip(a, b)))
    return math.fsum(c / n * math.log(c * n / (ca[x] * cb[y])) for (x, y), c in cab.items())


def conditional_entropy(a, b):
    """H(a | b)."""
    n = len(a)
    cb, cab = _counts(b), _counts(list(zip(a, b)))
    return -math.fsum(c / n * math.log(c / cb[y]) for (x, y), c in cab.items())


def nmi(a, b):
    ha, hb = entropy(a), entropy(b)
    if ha == 0 and hb == 0:
        return 1.0
    if ha == 0 or hb == 0:
        return 0.0
    return mutual_info(a, b) / math.sqrt(ha * hb)


def homogeneity(truth, pred):
    h = entropy(truth)
    return 1.0 if h == 0 else 1.0 - conditional_entropy(truth, pred) / h


def completeness(truth, pred):
    h = entropy(pred)
    return 1.0 if h == 0 else 1.0 - conditional_entropy(pred, truth) / h


def silhouette(points, labels):
    n = len(points)
    total = []
    for i in range(n):
        own = [math.dist(points[i], points[j]) for j in range(n) if j != i and labels[j] == labels[i]]
        if not own:
            total.append(0.0)
            continue
        a = math.fsum(own) / len(own)
        b = min(
            math.fsum(math.dist(points[i], points[j]) for j in range(n) if labels[j] == c)
            / sum(1 for j in range(n) if labels[j] == c)
            for c in set(labels) if c != labels[i]
        )
        total.append((b - a) / max(a, b) if max(a, b) > 0 else 0.0)
    return math.fsum(total) / n


def best_assignment(costs):
    """(minimum total, argmin permutation) over all k! permutations."""
    k = len(costs)
    best = None
    for perm in itertools.permutations(range(k)):
        total = math.fsum(costs[i][perm[i]] for i in range(k))
        if best is None or total < best[0]:
            best = (total, perm)
    return best


_PERMS = {}


def best_assignment_total(costs):
    """Exhaustive minimum like :func:`best_assignment`, vectorized for k <= 8.

    Every permutation total is evaluated in floating point; the candidates
    within a loose band of the smallest are then re-summed with ``fsum`` so
    the returned minimum is exact.
    """
    import numpy as np
    c = np.asarray(costs, dtype=float)
    k = c.shape[0]
    if k not in _PERMS:
        _PERMS[k] = np.array(list(itertools.permutations(range(k))))
    perms = _PERMS[k]
    totals = c[np.arange(k), perms].sum(axis=1)
    lo = totals.min()
    near = perms[totals <= lo + 1e-9 * max(1.0, abs(lo))]
    return min(math.fsum(c[i, p[i]] for i in range(k)) for p in near)


def disagreements(a, b):
    """Pairs grouped together by exactly one labeling."""
    n11, n10, n01, _ = pair_counts(a, b)
    return n10 + n01


def nearest(points, centroids):
    out = []
    for p in points:
        d = [sum((pi - ci) ** 2 for pi, ci in zip(p, c)) for c in centroids]
        out.append(min(range(len(d)), key=lambda j: (d[j], j)))
    return out
