"""Multi-center template classifier for sensitivity-first time-series detection."""
from .augment import AugmentConfig, augment_4x, jitter, magnitude_warp, scale
from .baselines import (CentroidModel, NnModel, knn_fit, knn_predict, knn_predict_many,
                        nearest_centroid_predict, nearest_centroid_train)
from .distance import DTW, EUCLIDEAN, DistanceSpec, distance, dtw_dependent, euclidean_flat, pairwise
from .evaluation import (EvalReport, LosoReport, bench, event_sensitivity, losocv, merge_windows,
                         roc_auc, roc_sweep, sample_specificity)
from .mcc import (IMPROVED, ORIGINAL, MccModel, Prediction, Template, TrainConfig, TrainTrace,
                  margin_threshold_scale, predict, predict_many, rank_templates, train)
from .preprocess import EventSpan, FilterSpec, SensorSession, apply_filters, butterworth_highpass, moving_average

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig", "augment_4x", "jitter", "magnitude_warp", "scale",
    "CentroidModel", "NnModel", "knn_fit", "knn_predict", "knn_predict_many",
    "nearest_centroid_predict", "nearest_centroid_train",
    "DTW", "EUCLIDEAN", "DistanceSpec", "distance", "dtw_dependent", "euclidean_flat", "pairwise",
    "EvalReport", "LosoReport", "bench", "event_sensitivity", "losocv", "merge_windows",
    "roc_auc", "roc_sweep", "sample_specificity",
    "IMPROVED", "ORIGINAL", "MccModel", "Prediction", "Template", "TrainConfig", "TrainTrace",
    "margin_threshold_scale", "predict", "predict_many", "rank_templates", "train",
    "EventSpan", "FilterSpec", "SensorSession", "apply_filters", "butterworth_highpass", "moving_average",
]
