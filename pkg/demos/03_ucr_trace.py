"""
UCR Trace with DTW
==================

Classes 1 and 2 are grouped as positive, 3 and 4 as negative. A single DTW
template covers the positives; widening its radius to halfway toward the
nearest training negative gives some slack for unseen positives. 1NN-DTW is
the accuracy reference and the speed baseline.

Pass a path to a UCR-format Trace file to use your own copy.
"""
import sys
from pathlib import Path

import numpy as np

from mcctm import (DTW, DistanceSpec, TrainConfig, knn_fit, knn_predict, knn_predict_many,
                   margin_threshold_scale, predict, predict_many, rank_templates, train)
from mcctm.datasets import load_ucr
from mcctm.evaluation import time_per_call

path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parents[1] / "tests" / "data" / "Trace_ALL.tsv"
data = load_ucr(path, pos_classes={1, 2}, neg_classes={3, 4}, seed=0)
tr, te = data.part("train"), data.part("test")
spec = DistanceSpec(DTW)

nn = knn_fit(tr, 1, spec)
print("1NN-DTW test accuracy:", np.mean(knn_predict_many(nn, te.samples) == te.labels))

model, trace = train(tr.positives, tr.negatives, TrainConfig(stop_precision=1.0, distance=spec))
model = rank_templates(model, tr.positives)
scale = margin_threshold_scale(model, tr.negatives)
print(f"MCC: {model.k} template(s), radius scale {scale:.2f}")
print("  test accuracy at scale 1:", np.mean(predict_many(model, te.samples) == te.labels))
print("  test accuracy at margin :", np.mean(predict_many(model, te.samples, None, scale) == te.labels))

t_mcc = time_per_call(lambda w: predict(model, w, None, scale), te.samples, 50)
t_nn = time_per_call(lambda w: knn_predict(nn, w), te.samples, 20)
print(f"single window: MCC {t_mcc / 1e3:.0f} us, 1NN {t_nn / 1e3:.0f} us ({t_nn / t_mcc:.0f}x)")
print(f"model JSON {len(model.to_json())} bytes")
