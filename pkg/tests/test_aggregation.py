import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdplan.aggregation import (
    Cluster,
    RepresentativeDaySet,
    agglomerate,
    centroid,
    ctpc_agglomerate,
    extract_representatives,
    mark_extreme_days,
    representative_days,
    ward_dissimilarity,
    ward_from_parts,
)
from rdplan.data_ingest import FeatureDays, features_from_day_matrices
from rdplan.errors import BadNrd, EmptyCluster

from oracles import naive_agglomerate, naive_ctpc, naive_ward


def toy_features(matrix, net=None):
    matrix = np.asarray(matrix, dtype=float)
    net = matrix[:, :1] if net is None else np.asarray(net, float)
    return FeatureDays(matrix=matrix, raw_net_load=net, norms={}, hours=matrix.shape[1] // 3)


def random_features(n_days, seed, hours=4):
    rng = np.random.default_rng(seed)
    return features_from_day_matrices(rng.random((n_days, hours)), rng.random((n_days, hours)), 0.8)


def test_centroid_examples():
    x = np.arange(12.0).reshape(4, 3)
    np.testing.assert_array_equal(centroid([2], x), x[2])
    np.testing.assert_array_equal(centroid([0, 3], x), (x[0] + x[3]) / 2)
    np.testing.assert_array_equal(centroid({0, 1}, np.array([[0.0, 2.0], [4.0, 6.0]])), [2.0, 4.0])
    with pytest.raises(EmptyCluster):
        centroid([], x)


def test_ward_examples():
    assert ward_from_parts(1, [1.0, 3.0], 1, [3.0, 7.0]) == 20.0
    assert ward_from_parts(3, [1.0, 1.0], 1, [0.0, 0.0]) == pytest.approx(3.0, abs=1e-12)
    a = Cluster([0], np.array([0.5, 0.5]))
    assert ward_dissimilarity(a, Cluster([4], np.array([0.5, 0.5]))) == 0.0


@given(
    st.integers(1, 9),
    st.integers(1, 9),
    st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    st.lists(st.floats(-10, 10), min_size=3, max_size=3),
)
def test_ward_symmetric_nonnegative(na, nb, x, y):
    d1 = ward_from_parts(na, x, nb, y)
    assert d1 == ward_from_parts(nb, y, na, x)
    assert d1 >= 0
    assert (d1 == 0) == (np.asarray(x) == np.asarray(y)).all() or d1 < 1e-300


def test_mark_extreme_days():
    net = np.zeros((365, 24))
    net[200, 18] = 2.0
    f = toy_features(np.zeros((365, 3)), net)
    assert mark_extreme_days(f) == [200]
    net[100, 3] = 2.0
    assert mark_extreme_days(f) == [100]
    assert mark_extreme_days(f, extra=[5, 100, 5]) == [100, 5]


def test_nrd_bounds():
    f = random_features(10, 0)
    for bad in (0, 11, 2.5):
        with pytest.raises(BadNrd):
            agglomerate(f, bad)
        with pytest.raises(BadNrd):
            ctpc_agglomerate(f, bad)


def test_identity_when_nrd_is_day_count():
    f = random_features(12, 1)
    c = agglomerate(f, 12)
    assert c.merge_log == []
    assert [cl.members for cl in c.clusters] == [[d] for d in range(12)]
    reps = extract_representatives(c, f)
    np.testing.assert_allclose(reps.lf, f.raw_load_pu, atol=1e-12)
    np.testing.assert_array_equal(reps.weights, 1.0)


def test_two_identical_pairs():
    x = np.array([[0.0, 0, 0], [1.0, 1, 1], [0.0, 0, 0], [1.0, 1, 1]])
    c = agglomerate(toy_features(x), 2)
    assert sorted(cl.members for cl in c.clusters) == [[0, 2], [1, 3]]


def test_single_merge_is_globally_closest_pair():
    f = random_features(365, 7, hours=24)
    c = agglomerate(f, 364)
    m = f.matrix
    d = np.array([[naive_ward(m[i], m[j], 1, 1) if i < j else np.inf for j in range(365)] for i in range(365)])
    i, j = np.unravel_index(np.argmin(d), d.shape)
    assert c.merge_log[0][:2] == (i, j)
    assert c.merge_log[0][2] == pytest.approx(d[i, j], rel=1e-12)


@pytest.mark.parametrize("seed", range(15))
def test_merges_match_brute_force(seed):
    n = 6 + seed % 15
    f = random_features(n, 100 + seed)
    nrd = 1 + seed % 4
    extremes = mark_extreme_days(f, extra=[n - 1] if seed % 3 == 0 else [])
    fast = agglomerate(f, nrd, extremes)
    clusters, log = naive_agglomerate(f.matrix, nrd, extremes)
    assert [cl.members for cl in fast.clusters] == clusters
    assert len(fast.merge_log) == len(log)
    for got, want in zip(fast.merge_log, log):
        assert got[:2] == want[:2]
        assert got[2] == pytest.approx(want[2], rel=1e-9, abs=1e-12)


def test_tie_goes_to_earliest_pair():
    # days 0/1 and 2/3 are equally close; the pair starting earlier merges first
    x = np.array([[0.0, 0, 0], [1.0, 0, 0], [5.0, 0, 0], [6.0, 0, 0]])
    c = agglomerate(toy_features(x), 3)
    assert c.merge_log[0][:2] == (0, 1)


def test_unpinned_centroids_are_means():
    f = random_features(40, 3)
    ext = mark_extreme_days(f)
    c = agglomerate(f, 6, ext)
    for cl in c.clusters:
        if cl.pinned_extreme is None:
            np.testing.assert_allclose(cl.centroid, f.matrix[cl.members].mean(axis=0), atol=1e-9)
        else:
            np.testing.assert_array_equal(cl.centroid, f.matrix[cl.pinned_extreme])


def test_extreme_day_profile_survives():
    f = random_features(60, 11, hours=24)
    reps = representative_days(f, 4)
    (e,) = mark_extreme_days(f)
    hits = [k for k in range(reps.nrd) if reps.extreme[k]]
    assert len(hits) == 1
    k = hits[0]
    assert e in reps.members[k]
    np.testing.assert_allclose(reps.lf[k], f.raw_load_pu[e], atol=1e-9)
    np.testing.assert_allclose(reps.wf[k], f.raw_wind[e], atol=1e-9)
    prof = f.denormalize(reps.centroids[k])
    np.testing.assert_allclose(prof["net"], f.raw_net_load[e], atol=1e-9)


def test_two_pinned_clusters_conflict(caplog):
    x = np.array([[0.0, 0, 0], [0.1, 0, 0], [9.0, 9, 9]])
    c = agglomerate(toy_features(x), 2, extremes=[0, 1])
    assert "merged" in caplog.text
    (pinned,) = [cl for cl in c.clusters if cl.members == [0, 1]]
    assert pinned.pinned_extreme == 0
    picks = {agglomerate(toy_features(x), 2, [0, 1], conflict="random", seed=s).clusters[0].pinned_extreme for s in range(20)}
    assert picks == {0, 1}


def test_deterministic():
    f = random_features(30, 5)
    a, b = agglomerate(f, 5, [2]), agglomerate(f, 5, [2])
    assert a.merge_log == b.merge_log


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 25), st.integers(1, 25), st.integers(0, 10_000))
def test_clusters_partition_days(n, nrd, seed):
    nrd = min(nrd, n)
    f = random_features(n, seed)
    for c in (agglomerate(f, nrd, mark_extreme_days(f)), ctpc_agglomerate(f, nrd)):
        assert c.nrd == nrd
        assert sorted(d for cl in c.clusters for d in cl.members) == list(range(n))
        assert len(c.merge_log) == n - nrd
        reps = extract_representatives(c, f)
        assert reps.weights.sum() == n
        assert np.all((reps.wf >= 0) & (reps.wf <= 1))


@pytest.mark.parametrize("seed", range(6))
def test_ctpc_matches_brute_force(seed):
    f = random_features(8 + 2 * seed, seed)
    fast = ctpc_agglomerate(f, 3)
    clusters, log = naive_ctpc(f.matrix, 3)
    assert [cl.members for cl in fast.clusters] == clusters
    for got, want in zip(fast.merge_log, log):
        assert got[:2] == want[:2]
        assert got[2] == pytest.approx(want[2], rel=1e-9)
    for cl in fast.clusters:
        assert cl.members == list(range(cl.members[0], cl.members[-1] + 1))
        assert cl.pinned_extreme is None


def test_ctpc_ramp_two_ranges():
    ramp = (np.linspace(0, 1, 365) ** 1.5)[:, None] * np.ones((1, 3))
    c = ctpc_agglomerate(toy_features(ramp), 2)
    clusters, _ = naive_ctpc(ramp, 2)
    assert [cl.members for cl in c.clusters] == clusters
    first, second = clusters
    assert first[0] == 0 and second[-1] == 364 and first[-1] + 1 == second[0]


def test_json_round_trip(tmp_path):
    f = random_features(20, 9, hours=24)
    reps = representative_days(f, 5)
    reps.save(tmp_path / "rds.json")
    back = RepresentativeDaySet.load(tmp_path / "rds.json")
    np.testing.assert_array_equal(back.lf, reps.lf)
    np.testing.assert_array_equal(back.wf, reps.wf)
    np.testing.assert_array_equal(back.weights, reps.weights)
    np.testing.assert_array_equal(back.centroids, reps.centroids)
    data = json.loads((tmp_path / "rds.json").read_text())
    assert {"lf", "wf", "weight", "extreme"} <= set(data["rds"][0])
    assert "norms" in data
