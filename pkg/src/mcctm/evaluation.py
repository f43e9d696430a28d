"""
Event- and sample-level metrics, ROC sweeps, leave-one-subject-out
cross-validation and inference benchmarking.

ROC curves here are built from a finite grid of operating parameters (number
of templates, or a multiplier on every template radius) rather than from
per-sample score thresholds. AUC is the trapezoid under the points sorted by
false-positive rate, anchored at (0, 0) and (1, 1).
"""
from __future__ import annotations

import csv
import io
import json
import statistics
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .distance import as_window
from .mcc import (MccModel, TrainConfig, predict, predict_from_distances, rank_templates,
                  template_distances, train)
from .preprocess import EventSpan

TEMPLATE_COUNT = "template_count"
THRESHOLD_SCALE = "threshold_scale"
DEFAULT_SCALE_GRID = tuple(np.logspace(np.log10(0.25), np.log10(4.0), 50))


# ---------------------------------------------------------------------------
# events


def merge_windows(hits: Sequence[Tuple[int, int]], sample_rate_hz: float = 1.0,
                  label: str = "event") -> List[EventSpan]:
    """Merge overlapping or touching ``(start_index, length)`` windows into spans.

    Span bounds are ``index / sample_rate_hz``; with the default rate they are
    sample indices.
    """
    spans: List[List[int]] = []
    for start, length in sorted((int(s), int(n)) for s, n in hits):
        end = start + length
        if spans and start <= spans[-1][1]:
            spans[-1][1] = max(spans[-1][1], end)
        else:
            spans.append([start, end])
    return [EventSpan(s / sample_rate_hz, e / sample_rate_hz, label) for s, e in spans]


def _intersects(p: EventSpan, t: EventSpan) -> bool:
    if t.start_s == t.end_s:
        return p.start_s <= t.start_s < p.end_s or p.start_s == p.end_s == t.start_s
    return max(p.start_s, t.start_s) < min(p.end_s, t.end_s)


def event_sensitivity(pred: Sequence[EventSpan], truth: Sequence[EventSpan]) -> float:
    """Fraction of true events hit by at least one predicted span."""
    if len(truth) == 0:
        raise ValueError("event sensitivity is undefined without true events")
    hit = sum(any(_intersects(p, t) for p in pred) for t in truth)
    return hit / len(truth)


def sample_specificity(predictions: Sequence[bool]) -> float:
    """True-negative rate over windows drawn from negative material."""
    p = np.asarray(predictions, dtype=bool)
    if p.size == 0:
        raise ValueError("specificity is undefined without negative windows")
    return float(np.mean(~p))


# ---------------------------------------------------------------------------
# ROC


def roc_auc(points: Sequence[Tuple[float, float]]) -> float:
    """Trapezoidal area under (fpr, tpr) points with (0,0) and (1,1) added.

    Points sharing an FPR collapse to their best TPR.
    """
    best: Dict[float, float] = {0.0: 0.0, 1.0: 1.0}
    for fpr, tpr in points:
        best[float(fpr)] = max(best.get(float(fpr), 0.0), float(tpr))
    xs = np.array(sorted(best))
    ys = np.array([best[x] for x in xs])
    return float(np.sum(np.diff(xs) * (ys[1:] + ys[:-1]) / 2.0))


def roc_from_scores(scores: Sequence[float], labels: Sequence[bool]):
    """ROC points from thresholding scores (higher = more positive)."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=bool)
    if y.all() or not y.any():
        raise ValueError("need both classes")
    pts = []
    for thr in np.unique(s):
        pred = s >= thr
        pts.append((float(np.mean(pred[~y])), float(np.mean(pred[y])), float(thr)))
    return sorted(pts)


@dataclass
class EvalReport:
    sensitivity: float
    specificity: float
    auc: float
    roc_points: List[Tuple[float, float, float]] = field(default_factory=list)
    per_session: Dict[str, dict] = field(default_factory=dict)
    timing_ns_per_inference: Optional[float] = None
    model_bytes: Optional[int] = None
    extra: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["roc_points"] = [list(p) for p in self.roc_points]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def roc_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "fpr", "tpr"])
        for fpr, tpr, param in self.roc_points:
            w.writerow([repr(float(param)), repr(float(fpr)), repr(float(tpr))])
        return buf.getvalue()


def _sort_points(points):
    return sorted(points, key=lambda p: (p[0], p[1], p[2]))


def operating_grid(model: MccModel, mode: str, max_templates: Optional[int] = None,
                   grid: Optional[Sequence[float]] = None) -> List[Tuple[int, float, float]]:
    """(top_k, threshold_scale, param) settings for a sweep."""
    if mode == TEMPLATE_COUNT:
        kmax = model.k if max_templates is None else min(max_templates, model.k)
        return [(k, 1.0, float(k)) for k in range(1, kmax + 1)]
    if mode == THRESHOLD_SCALE:
        scales = DEFAULT_SCALE_GRID if grid is None else grid
        return [(model.k, float(s), float(s)) for s in scales]
    raise ValueError(f"unknown sweep mode {mode!r}")


def roc_sweep(model: MccModel, pos_eval: Sequence, neg_eval: Sequence, mode: str = TEMPLATE_COUNT,
              max_templates: Optional[int] = None, grid: Optional[Sequence[float]] = None,
              top_k: Optional[int] = None, threshold_scale: float = 1.0) -> EvalReport:
    """Window-level ROC over the chosen operating parameter.

    The report's sensitivity/specificity are for ``top_k``/``threshold_scale``
    (all templates, unit scale by default).
    """
    if len(pos_eval) == 0 or len(neg_eval) == 0:
        raise ValueError("roc_sweep needs positive and negative evaluation windows")
    radii = np.array([t.radius for t in model.ordered()])
    dp = template_distances(model, pos_eval)
    dn = template_distances(model, neg_eval)
    pts = []
    for k, s, param in operating_grid(model, mode, max_templates, grid):
        tpr = float(np.mean(predict_from_distances(dp, radii, k, s)))
        fpr = float(np.mean(predict_from_distances(dn, radii, k, s)))
        pts.append((fpr, tpr, param))
    pts = _sort_points(pts)
    k = model.k if top_k is None else top_k
    sens = float(np.mean(predict_from_distances(dp, radii, k, threshold_scale)))
    spec = sample_specificity(predict_from_distances(dn, radii, k, threshold_scale))
    return EvalReport(sens, spec, roc_auc([(p[0], p[1]) for p in pts]), pts,
                      extra={"mode": mode})


# ---------------------------------------------------------------------------
# cross-validation over pre-windowed subjects


@dataclass
class FoldResult:
    subject: str
    report: EvalReport
    template_sources: List[str]
    n_templates: int


@dataclass
class LosoReport:
    folds: List[FoldResult]
    sensitivity: float
    specificity: float
    auc: float

    def to_dict(self) -> dict:
        return {
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "auc": self.auc,
            "folds": [
                {"subject": f.subject, "n_templates": f.n_templates,
                 "template_sources": f.template_sources, **f.report.to_dict()}
                for f in self.folds
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def aggregate_models(models: Dict[str, MccModel], fingerprint: str = "") -> MccModel:
    """Pool the templates of per-subject models, tagging each with its subject."""
    templates = []
    first = None
    for subject, m in models.items():
        first = first or m
        templates += [replace(t, rank=None, coverage_count=0, source=subject) for t in m.templates]
    return MccModel(templates, first.distance, first.window_shape,
                    fingerprint or first.preprocessing_fingerprint)


def losocv(subject_sets: Dict[str, Tuple[Sequence, Sequence]], config: TrainConfig = TrainConfig(),
           mode: str = TEMPLATE_COUNT, top_k: Optional[int] = None,
           threshold_scale: float = 1.0) -> LosoReport:
    """Leave-one-subject-out over ``subject -> (positives, negatives)`` windows.

    Each fold trains one model per remaining subject, pools their templates,
    ranks them on the pooled training positives and evaluates on the held-out
    subject. Metrics are macro-averaged over folds.
    """
    if len(subject_sets) < 2:
        raise ValueError("LOSOCV needs at least two subjects")
    folds = []
    for held in subject_sets:
        models = {}
        pooled_pos = []
        for subj, (pos, neg) in subject_sets.items():
            if subj == held:
                continue
            models[subj], _ = train(pos, neg, config)
            pooled_pos += list(pos)
        model = rank_templates(aggregate_models(models), pooled_pos)
        sources = [t.source for t in model.ordered()]
        if held in sources:
            raise AssertionError(f"fold {held!r} uses its own templates")
        pos, neg = subject_sets[held]
        k = None if top_k is None else min(top_k, model.k)
        rep = roc_sweep(model, pos, neg, mode, top_k=k, threshold_scale=threshold_scale)
        folds.append(FoldResult(held, rep, sources, model.k))
    return LosoReport(
        folds,
        float(np.mean([f.report.sensitivity for f in folds])),
        float(np.mean([f.report.specificity for f in folds])),
        float(np.mean([f.report.auc for f in folds])),
    )


# ---------------------------------------------------------------------------
# benchmarking


def time_per_call(fn: Callable, windows: Sequence, repetitions: int) -> float:
    """Median wall-clock nanoseconds of ``fn(window)`` after one warm-up call."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    windows = [as_window(w) for w in windows]
    if not windows:
        raise ValueError("need at least one window")
    fn(windows[0])
    samples = []
    for r in range(repetitions):
        w = windows[r % len(windows)]
        t0 = time.perf_counter_ns()
        fn(w)
        samples.append(time.perf_counter_ns() - t0)
    return float(statistics.median(samples))


def bench(model: MccModel, eval_windows: Sequence, repetitions: int = 100,
          top_k: Optional[int] = None) -> Tuple[float, int]:
    """(median ns per single-window predict, serialized model size in bytes)."""
    ns = time_per_call(lambda w: predict(model, w, top_k), eval_windows, repetitions)
    return ns, len(model.to_json().encode())
