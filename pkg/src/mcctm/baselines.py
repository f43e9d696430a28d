"""
Reference classifiers: k-nearest neighbours and a medoid nearest-centroid.

Both share the distance kernels used by the template classifier, so they work
with DTW as well as flat Euclidean distance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .datasets import LabeledSet
from .distance import DistanceSpec, as_window, pairwise
from .mcc import _minimax_medoid


@dataclass
class NnModel:
    samples: List[np.ndarray]
    labels: np.ndarray
    k: int = 1
    distance: DistanceSpec = DistanceSpec()

    def __post_init__(self):
        if not 1 <= self.k <= len(self.samples):
            raise ValueError(f"k must lie in 1..{len(self.samples)}")


def knn_fit(data: LabeledSet, k: int = 1, spec: DistanceSpec = DistanceSpec()) -> NnModel:
    return NnModel([as_window(s) for s in data.samples], np.asarray(data.labels, bool), k, spec)


def knn_predict_many(model: NnModel, windows: Sequence) -> np.ndarray:
    """Majority vote of the k nearest training samples; even splits go negative."""
    d = pairwise(windows, model.samples, model.distance)
    idx = np.argsort(d, axis=1, kind="stable")[:, : model.k]
    votes = model.labels[idx].sum(axis=1)
    return 2 * votes > model.k


def knn_predict(model: NnModel, w) -> bool:
    return bool(knn_predict_many(model, [w])[0])


@dataclass
class CentroidModel:
    """One medoid per class present in the training data."""

    positive: Optional[np.ndarray]
    negative: Optional[np.ndarray]
    distance: DistanceSpec


def nearest_centroid_train(data: LabeledSet, spec: DistanceSpec = DistanceSpec()) -> CentroidModel:
    """Per-class minimax medoid (smallest largest distance to its classmates)."""
    if len(data) == 0:
        raise ValueError("empty training set")

    def medoid(windows):
        if not windows:
            return None
        return as_window(windows[_minimax_medoid(pairwise(windows, windows, spec))])

    return CentroidModel(medoid(data.positives), medoid(data.negatives), spec)


def nearest_centroid_predict(model: CentroidModel, w) -> bool:
    if model.negative is None:
        return True
    if model.positive is None:
        return False
    d = pairwise([w], [model.positive, model.negative], model.distance)[0]
    return bool(d[0] < d[1])
