import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mcctm.distance import (DTW, EUCLIDEAN, DistanceSpec, as_window, distance, dtw_dependent,
                            euclidean_flat, pairwise)
from oracles import dtw_enumerate, euclid_loop

BAND0 = DistanceSpec(DTW, 0)


def test_as_window_shapes():
    assert as_window([1.0, 2.0, 3.0]).shape == (3, 1)
    assert as_window([[1.0, 2.0]]).shape == (1, 2)
    with pytest.raises(ValueError):
        as_window([])
    with pytest.raises(ValueError):
        as_window([[np.nan]])


def test_distance_spec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        DistanceSpec("manhattan")
    with pytest.raises(ValueError):
        DistanceSpec(DTW, -1)
    spec = DistanceSpec(DTW, 3)
    assert DistanceSpec.from_dict(spec.to_dict()) == spec


def test_euclid_identity_and_345():
    a = np.random.default_rng(0).normal(size=(6, 2))
    assert euclidean_flat(a, a) == 0.0
    assert euclidean_flat([[0], [0]], [[3], [4]]) == 5.0


def test_euclid_matches_loop():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(20, 2)), rng.normal(size=(20, 2))
    assert euclidean_flat(a, b) == pytest.approx(euclid_loop(a, b), rel=1e-12)


def test_euclid_shape_mismatch_names_shapes():
    with pytest.raises(ValueError, match=r"\(3, 1\).*\(4, 1\)"):
        euclidean_flat(np.zeros(3), np.zeros(4))


def test_dtw_identity_and_repeated_frame():
    a = np.random.default_rng(2).normal(size=(9, 3))
    assert dtw_dependent(a, a) == 0.0
    assert dtw_dependent([[1], [2], [3]], [[1], [2], [2], [3]]) == 0.0


def test_dtw_matches_path_enumeration_5x7():
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=(5, 3)), rng.normal(size=(7, 3))
    assert dtw_dependent(a, b) == pytest.approx(dtw_enumerate(a, b), abs=1e-12)


def test_dtw_banded_matches_enumeration():
    rng = np.random.default_rng(4)
    for band in (1, 2, 3):
        a, b = rng.normal(size=(6, 2)), rng.normal(size=(6, 2))
        got = dtw_dependent(a, b, DistanceSpec(DTW, band))
        assert got == pytest.approx(dtw_enumerate(a, b, band), abs=1e-12)


def test_dtw_band_zero_is_diagonal_sum():
    rng = np.random.default_rng(5)
    a, b = rng.normal(size=(12, 2)), rng.normal(size=(12, 2))
    diag = float(np.sum(np.linalg.norm(a - b, axis=1)))
    assert dtw_dependent(a, b, BAND0) == pytest.approx(diag, rel=1e-12)


def test_dtw_errors():
    with pytest.raises(ValueError):
        dtw_dependent(np.zeros((4, 2)), np.zeros((4, 3)))
    with pytest.raises(ValueError):
        dtw_dependent(np.zeros((4, 1)), np.zeros((7, 1)), DistanceSpec(DTW, 2))


def test_pairwise_agrees_with_scalar_kernels():
    rng = np.random.default_rng(6)
    xs = [rng.normal(size=(rng.integers(3, 9), 2)) for _ in range(5)]
    ys = [rng.normal(size=(rng.integers(3, 9), 2)) for _ in range(4)]
    d = pairwise(xs, ys, DistanceSpec(DTW))
    assert d.shape == (5, 4)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            assert d[i, j] == dtw_dependent(x, y)
    fx = [rng.normal(size=(4, 2)) for _ in range(3)]
    e = pairwise(fx, fx, DistanceSpec(EUCLIDEAN))
    for i in range(3):
        for j in range(3):
            assert e[i, j] == distance(fx[i], fx[j], DistanceSpec(EUCLIDEAN))


windows = st.integers(1, 6).flatmap(
    lambda n: arrays(np.float64, (n, 2), elements=st.floats(-50, 50, allow_nan=False))
)


@settings(max_examples=60, deadline=None)
@given(windows, windows)
def test_dtw_symmetric_nonnegative(a, b):
    d1, d2 = dtw_dependent(a, b), dtw_dependent(b, a)
    assert d1 >= 0
    assert d1 == pytest.approx(d2, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_dtw_below_diagonal_and_band_monotone(n, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(n, 2)), rng.normal(size=(n, 2))
    diag = float(np.sum(np.linalg.norm(a - b, axis=1)))
    prev = dtw_dependent(a, b, BAND0)
    assert prev <= diag + 1e-12
    for band in range(1, n + 1):
        cur = dtw_dependent(a, b, DistanceSpec(DTW, band))
        assert cur <= prev + 1e-12
        prev = cur
    assert prev == dtw_dependent(a, b)
