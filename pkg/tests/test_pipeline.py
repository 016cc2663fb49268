import math

import numpy as np
import pytest

from cnak import simgen
from cnak.core import DataError
from cnak.kmeans import KMeansConfig
from cnak.matching import match_centroids
from cnak.pipeline import (
    CnakConfig,
    ScoreCurve,
    bucketize,
    cnak_cluster,
    estimate_k,
    pair_score,
    resolve_sample_size,
    score_for_k,
    stability_report,
)


def small_cfg(**kw):
    base = dict(k_min=1, k_max=6, trials=8, sample_fraction=0.5, seed=3)
    base.update(kw)
    return CnakConfig(**base)


def test_config_validation():
    for kw in (dict(k_min=0), dict(k_min=5, k_max=4), dict(trials=1), dict(sample_fraction=0.0),
               dict(sample_fraction=1.5), dict(basis="sum"), dict(reference=50), dict(threads=0)):
        with pytest.raises(ValueError):
            CnakConfig(**kw)


def test_pair_score_identical_sets_is_zero():
    c = np.random.default_rng(0).normal(size=(4, 2))
    score, costs = pair_score([c, c[::-1], c[[2, 0, 3, 1]]])
    assert score == 0.0 and costs.shape == (3,)
    with pytest.raises(ValueError):
        pair_score([c])


def test_pair_score_hand_value():
    a = np.array([[0.0], [10.0]])
    b = np.array([[1.0], [9.0]])
    c = np.array([[0.0], [12.0]])
    # matched costs: a-b 2, a-c 2, b-c 4
    score, costs = pair_score([a, b, c])
    assert costs.tolist() == [2.0, 2.0, 4.0]
    assert score == pytest.approx(8 / 3, abs=1e-15)


def test_bucketize_example():
    s0 = np.array([[0.0], [10.0]])
    s1 = np.array([[9.8], [0.2]])
    b = bucketize([s0, s1], [match_centroids(s0, s1)], 2, 2)
    assert b.means.ravel().tolist() == pytest.approx([0.1, 9.9], abs=1e-12)
    assert [c.shape for c in b.cells] == [(2, 1), (2, 1)]
    with pytest.raises(ValueError):
        bucketize([s0], [], 2, 2)


def test_resolve_sample_size():
    x = np.zeros((101, 2))
    x[:, 0] = np.arange(101)
    assert resolve_sample_size(x, small_cfg(sample_fraction=0.31)) == math.ceil(0.31 * 101)
    assert resolve_sample_size(x, small_cfg(sample_fraction=1.0)) == 101


def test_sample_floor_error():
    x = simgen.generate("sim1", 0)
    with pytest.raises(DataError):
        estimate_k(x, small_cfg(k_max=12, sample_fraction="auto"))


def test_score_curve_selection_and_round_trip():
    c = ScoreCurve([1, 2, 3, 4], [4.0, 2.0, 3.0, 3.0], [4.0, 1.0, 1.0, 0.75], "raw", 9)
    assert c.argmin_k == 2 and c.ranked == [2, 3, 4, 1] and c.local_minima == [2]
    c.basis = "per_k"
    assert c.argmin_k == 4 and c.local_minima == [4]
    tie = ScoreCurve([1, 2, 3], [1.0, 1.0, 2.0], [1.0, 0.5, 2 / 3])
    tie.basis = "raw"
    assert tie.argmin_k == 1
    assert ScoreCurve.from_dict(c.to_dict()) == c


def test_cnak_on_separated_blobs():
    d = simgen.generate("sim2", 1)
    curve, res = cnak_cluster(d, small_cfg(trials=10, sample_fraction=0.31))
    assert res.k == 5 and curve.argmin_k == 5
    assert res.labels.shape == (500,) and np.unique(res.labels).size == 5
    assert all(v >= 0 for v in curve.raw)
    assert curve.per_k == pytest.approx([r / k for r, k in zip(curve.raw, curve.ks)])


def test_score_for_k_is_deterministic_and_sized():
    d = simgen.generate("sim2", 2)
    cfg = small_cfg()
    a, b = score_for_k(d, 3, cfg), score_for_k(d, 3, cfg)
    assert a.score == b.score and len(a.sets) == 8 and len(a.to_reference) == 7
    assert a.pair_costs.shape == (28,)
    assert all(np.array_equal(x, y) for x, y in zip(a.sets, b.sets))
    assert score_for_k(d, 3, small_cfg(seed=4)).score != a.score


def test_threads_do_not_change_results():
    d = simgen.generate("sim6", 0)
    one = estimate_k(d, small_cfg())
    many = estimate_k(d, small_cfg(threads=4))
    assert one.raw == many.raw


def test_stability_report():
    d = simgen.generate("sim5", 0)
    rep = stability_report(d, small_cfg(k_max=4, trials=6, sample_fraction=0.5,
                                        kmeans=KMeansConfig(n_init=2)), repeats=3)
    assert sum(rep.counts.values()) == 3 and rep.frequency == rep.counts[rep.mode]
    assert rep.to_dict()["repeats"] == 3
    with pytest.raises(ValueError):
        stability_report(d, small_cfg(), 0)


def test_sim8_selects_three_outer_groups():
    curve = estimate_k(simgen.generate("sim8", 0), CnakConfig(trials=20, seed=0))
    assert curve.argmin_k == 3


def test_raw_basis_is_available():
    d = simgen.generate("sim2", 0)
    c = estimate_k(d, small_cfg(basis="raw", k_max=3))
    assert c.scores == c.raw and c.basis == "raw"
