"""
Choosing an operating point
===========================

Two knobs move a trained model along its ROC curve: how many of the ranked
templates are consulted, and a multiplier on every radius. Both only ever add
positives as they grow.
"""
import numpy as np

from mcctm import TrainConfig, rank_templates, roc_sweep, train
from mcctm.datasets import gen_blobs
from mcctm.evaluation import THRESHOLD_SCALE

data = gen_blobs(600, 600, (0, 0), (0, 2.5), 1.5, 1.0, seed=3)
tr, te = data.part("train"), data.part("test")
model, _ = train(tr.positives, tr.negatives, TrainConfig(stop_precision=0.9, max_clusters=30))
model = rank_templates(model, tr.positives)

by_count = roc_sweep(model, te.positives, te.negatives)
by_scale = roc_sweep(model, te.positives, te.negatives, THRESHOLD_SCALE)
print(f"{model.k} templates; AUC by template count {by_count.auc:.3f}, by radius scale {by_scale.auc:.3f}")

print("\n  K   fpr    tpr")
for fpr, tpr, k in sorted(by_count.roc_points, key=lambda p: p[2])[:: max(1, model.k // 8)]:
    print(f"{int(k):3d}  {fpr:.3f}  {tpr:.3f}")

print("\nscale  fpr    tpr")
for fpr, tpr, s in by_scale.roc_points[::7]:
    print(f"{s:5.2f}  {fpr:.3f}  {tpr:.3f}")

# The curve is plain data; write it for any plotting tool.
np.savetxt("roc_scale.csv", np.array(by_scale.roc_points)[:, [2, 0, 1]], delimiter=",",
           header="param,fpr,tpr", comments="")
