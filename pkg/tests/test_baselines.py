import numpy as np
import pytest

from mcctm.baselines import (knn_fit, knn_predict, knn_predict_many, nearest_centroid_predict,
                             nearest_centroid_train)
from mcctm.datasets import LabeledSet, gen_blobs
from mcctm.distance import DTW, DistanceSpec, euclidean_flat


def pts(*xy):
    return [np.array([p], dtype=float) for p in xy]


def test_knn_self_query_and_majority():
    d = gen_blobs(15, 15, (0, 0), (1, 1), 1, 1, seed=0)
    m = knn_fit(d, 1)
    assert all(knn_predict(m, s) == y for s, y in zip(d.samples, d.labels))
    mostly_pos = LabeledSet(pts((0, 0), (5, 5), (9, 9)), [True, True, False])
    assert knn_predict(knn_fit(mostly_pos, 3), [[100.0, 100.0]])


def test_knn_even_split_goes_negative():
    d = LabeledSet(pts((0, 0), (1, 0)), [True, False])
    assert not knn_predict(knn_fit(d, 2), [[0.0, 0.0]])


def test_knn_duplicates_use_lowest_index():
    d = LabeledSet(pts((0, 0), (0, 0)), [False, True])
    assert not knn_predict(knn_fit(d, 1), [[0.0, 0.0]])


def test_knn_matches_sort_oracle():
    d = gen_blobs(30, 30, (0, 0), (1, 0), 1, 1, seed=1)
    m = knn_fit(d, 3)
    q = [np.random.default_rng(2).normal(size=(1, 2)) for _ in range(50)]
    got = knn_predict_many(m, q)
    for x, g in zip(q, got):
        order = sorted(range(len(d)), key=lambda i: (euclidean_flat(x, d.samples[i]), i))[:3]
        assert g == (sum(d.labels[i] for i in order) >= 2)


def test_knn_k_range():
    d = LabeledSet(pts((0, 0)), [True])
    with pytest.raises(ValueError):
        knn_fit(d, 2)


def test_knn_dtw():
    t = np.linspace(0, 1, 30)
    pos = [np.sin(2 * np.pi * t * f)[:, None] for f in (1, 1.1, 0.9)]
    neg = [np.cos(2 * np.pi * t * f)[:, None] for f in (3, 3.1, 2.9)]
    d = LabeledSet(pos + neg, [True] * 3 + [False] * 3)
    m = knn_fit(d, 1, DistanceSpec(DTW))
    assert knn_predict(m, np.sin(2 * np.pi * t * 1.05)[:, None])
    assert not knn_predict(m, np.cos(2 * np.pi * t * 3.05)[:, None])


def test_centroid_singletons_and_boundary():
    d = LabeledSet(pts((-1, 0), (1, 0)), [True, False])
    m = nearest_centroid_train(d)
    assert nearest_centroid_predict(m, [[-0.2, 5.0]])
    assert not nearest_centroid_predict(m, [[0.2, -3.0]])
    # equidistant probes on the perpendicular bisector fall to the negative side
    assert not any(nearest_centroid_predict(m, [[0.0, y]]) for y in np.linspace(-5, 5, 11))


def test_centroid_symmetric_classes():
    pos = pts((-3, 0), (-2, 0), (-1, 0))
    neg = pts((1, 0), (2, 0), (3, 0))
    m = nearest_centroid_train(LabeledSet(pos + neg, [True] * 3 + [False] * 3))
    assert m.positive[0, 0] == -2 and m.negative[0, 0] == 2
    for x in np.linspace(-4, 4, 17):
        if x != 0:
            assert nearest_centroid_predict(m, [[x, 1.0]]) == (x < 0)


def test_centroid_single_class():
    only = LabeledSet(pts((0, 0), (1, 1)), [True, True])
    m = nearest_centroid_train(only)
    assert nearest_centroid_predict(m, [[50.0, 50.0]])
    none = LabeledSet(pts((0, 0)), [False])
    assert not nearest_centroid_predict(nearest_centroid_train(none), [[0.0, 0.0]])
    with pytest.raises(ValueError):
        nearest_centroid_train(LabeledSet([], []))
