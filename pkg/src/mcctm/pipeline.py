"""
End-to-end event detection on sensor sessions.

Training: filter each session, keep the configured channels, cut a window
around every annotated event, enlarge the positives four-fold, and draw
negatives from sliding windows over event-free sessions. One model is trained
per subject; the templates of all training subjects are pooled and ranked by
how many new pooled positives each one hits.

Testing: slide a window over every test session at a fine stride, classify
each window, merge positive windows into predicted events, and score event
sensitivity on event sessions and window specificity on event-free sessions.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .augment import AugmentConfig, augment_4x
from .distance import DTW, DistanceSpec
from .evaluation import (TEMPLATE_COUNT, EvalReport, FoldResult, LosoReport, aggregate_models,
                         event_sensitivity, merge_windows, operating_grid, roc_auc,
                         sample_specificity)
from .mcc import MccModel, TrainConfig, predict_from_distances, rank_templates, template_distances, train
from .preprocess import (FilterSpec, SensorSession, apply_filters, extract_event_windows,
                         fingerprint, read_session, select_channels, slide_windows, window_length,
                         write_session)


@dataclass(frozen=True)
class PipelineConfig:
    filters: FilterSpec = FilterSpec()
    channels: Optional[Tuple[str, ...]] = ("x", "y")
    window_s: float = 0.4
    train_stride_s: float = 0.1
    test_stride_s: float = 0.02
    event_label: str = "event"
    negative_ratio: int = 4
    augment: Optional[AugmentConfig] = AugmentConfig()
    train: TrainConfig = TrainConfig(stop_precision=0.8, distance=DistanceSpec(DTW))
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "filters": self.filters.to_dict(),
            "channels": list(self.channels) if self.channels is not None else None,
            "window_s": self.window_s,
            "train_stride_s": self.train_stride_s,
            "test_stride_s": self.test_stride_s,
            "event_label": self.event_label,
            "negative_ratio": self.negative_ratio,
            "augment": self.augment.to_dict() if self.augment else None,
            "train": self.train.to_dict(),
            "seed": self.seed,
        }

    def preprocessing_dict(self) -> dict:
        return {
            "filters": self.filters.to_dict(),
            "channels": list(self.channels) if self.channels is not None else None,
            "window_s": self.window_s,
        }

    def fingerprint(self) -> str:
        """Digest of the signal conditioning plus the training variant."""
        return fingerprint({"preprocessing": self.preprocessing_dict(), "variant": self.train.variant})


@dataclass
class Subject:
    name: str
    event_sessions: List[SensorSession] = field(default_factory=list)
    null_sessions: List[SensorSession] = field(default_factory=list)


def _tag(text: str) -> int:
    return zlib.crc32(text.encode())


def condition(session: SensorSession, cfg: PipelineConfig) -> SensorSession:
    s = apply_filters(session, cfg.filters)
    return select_channels(s, cfg.channels) if cfg.channels is not None else s


def subject_windows(subject: Subject, cfg: PipelineConfig) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Training positives (augmented) and subsampled negatives for one subject."""
    pos = []
    for s in subject.event_sessions:
        pos += extract_event_windows(condition(s, cfg), cfg.event_label, cfg.window_s)
    if cfg.augment is not None:
        pos = augment_4x(pos, replace(cfg.augment, rng_seed=cfg.augment.rng_seed + _tag(subject.name)))
    pool = []
    for s in subject.null_sessions:
        pool += [w for _, w in slide_windows(condition(s, cfg), cfg.window_s, cfg.train_stride_s)]
    n_neg = min(len(pool), cfg.negative_ratio * len(pos))
    rng = np.random.default_rng([cfg.seed, _tag(subject.name)])
    pick = np.sort(rng.choice(len(pool), size=n_neg, replace=False)) if n_neg else []
    return pos, [pool[i] for i in pick]


def train_pooled(subjects: Sequence[Subject], cfg: PipelineConfig) -> Tuple[MccModel, List[np.ndarray]]:
    """Per-subject models pooled and ranked; also returns the pooled positives."""
    models, pooled = {}, []
    for subj in subjects:
        pos, neg = subject_windows(subj, cfg)
        if not pos:
            continue
        tcfg = replace(cfg.train, rng_seed=cfg.train.rng_seed + _tag(subj.name) % 2**31)
        models[subj.name], _ = train(pos, neg, tcfg)
        pooled += pos
    if not models:
        raise ValueError("no training subject has annotated events")
    model = aggregate_models(models, cfg.fingerprint())
    return rank_templates(model, pooled), pooled


@dataclass
class _Scored:
    session: SensorSession
    starts: np.ndarray
    dist: np.ndarray


def _score_sessions(model: MccModel, sessions: Sequence[SensorSession], cfg: PipelineConfig) -> List[_Scored]:
    out = []
    for s in sessions:
        c = condition(s, cfg)
        wins = slide_windows(c, cfg.window_s, cfg.test_stride_s)
        starts = np.array([i for i, _ in wins])
        out.append(_Scored(s, starts, template_distances(model, [w for _, w in wins])))
    return out


def _event_metrics(scored: _Scored, radii, k, scale, n, cfg) -> float:
    hits = predict_from_distances(scored.dist, radii, k, scale)
    pred = merge_windows([(st, n) for st, h in zip(scored.starts, hits) if h],
                         scored.session.sample_rate_hz, cfg.event_label)
    truth = [a for a in scored.session.annotations if a.label == cfg.event_label]
    return event_sensitivity(pred, truth)


def _key(taken: dict, name: str) -> str:
    """``name``, or ``name#i`` for the i-th repeat of an already used name."""
    key, i = name, 1
    while key in taken:
        key, i = f"{name}#{i}", i + 1
    return key


def evaluate_sessions(model: MccModel, event_sessions: Sequence[SensorSession],
                      null_sessions: Sequence[SensorSession], cfg: PipelineConfig,
                      mode: str = TEMPLATE_COUNT, top_k: Optional[int] = None,
                      threshold_scale: float = 1.0, grid=None) -> EvalReport:
    """Event sensitivity (mean over event sessions) vs window specificity, swept."""
    ev = [s for s in _score_sessions(model, event_sessions, cfg)
          if any(a.label == cfg.event_label for a in s.session.annotations)]
    nl = _score_sessions(model, null_sessions, cfg)
    if not ev or not nl:
        raise ValueError("need event sessions with annotations and event-free sessions")
    radii = np.array([t.radius for t in model.ordered()])
    n = window_length(cfg.window_s, ev[0].session.sample_rate_hz)
    null_dist = np.vstack([s.dist for s in nl])

    def at(k, scale):
        sens = float(np.mean([_event_metrics(s, radii, k, scale, n, cfg) for s in ev]))
        spec = sample_specificity(predict_from_distances(null_dist, radii, k, scale))
        return sens, spec

    pts = []
    for k, scale, param in operating_grid(model, mode, grid=grid):
        sens, spec = at(k, scale)
        pts.append((1.0 - spec, sens, param))
    pts.sort()
    k = model.k if top_k is None else min(top_k, model.k)
    sens, spec = at(k, threshold_scale)
    per_session = {}
    for s in ev:
        per_session[_key(per_session, s.session.name)] = {
            "sensitivity": _event_metrics(s, radii, k, threshold_scale, n, cfg)}
    for s in nl:
        per_session[_key(per_session, s.session.name)] = {
            "specificity": sample_specificity(predict_from_distances(s.dist, radii, k, threshold_scale))
        }
    return EvalReport(sens, spec, roc_auc([(p[0], p[1]) for p in pts]), pts, per_session,
                      extra={"mode": mode, "top_k": k, "threshold_scale": threshold_scale})


def losocv_sessions(subjects: Sequence[Subject], cfg: PipelineConfig, mode: str = TEMPLATE_COUNT,
                    top_k: Optional[int] = None, threshold_scale: float = 1.0) -> LosoReport:
    """Leave-one-subject-out over session data; metrics macro-averaged over folds."""
    if len(subjects) < 2:
        raise ValueError("LOSOCV needs at least two subjects")
    folds = []
    for held in subjects:
        rest = [s for s in subjects if s.name != held.name]
        model, _ = train_pooled(rest, cfg)
        sources = [t.source for t in model.ordered()]
        if held.name in sources:
            raise AssertionError(f"fold {held.name!r} uses its own templates")
        rep = evaluate_sessions(model, held.event_sessions, held.null_sessions, cfg, mode,
                                top_k, threshold_scale)
        folds.append(FoldResult(held.name, rep, sources, model.k))
    return LosoReport(
        folds,
        float(np.mean([f.report.sensitivity for f in folds])),
        float(np.mean([f.report.specificity for f in folds])),
        float(np.mean([f.report.auc for f in folds])),
    )


def pooled_roc(report: LosoReport) -> List[Tuple[float, float]]:
    """Fold-averaged (fpr, tpr) for parameters shared by every fold."""
    by_param: Dict[float, List[Tuple[float, float]]] = {}
    for f in report.folds:
        for fpr, tpr, p in f.report.roc_points:
            by_param.setdefault(p, []).append((fpr, tpr))
    n = len(report.folds)
    return sorted((float(np.mean([a for a, _ in v])), float(np.mean([b for _, b in v])))
                  for v in by_param.values() if len(v) == n)


def write_subjects(out_dir, subjects: Sequence[Subject]):
    """``<out>/<subject>/{event,null}_NN.csv`` with ``_events.csv`` annotation sidecars."""
    root = Path(out_dir)
    for subj in subjects:
        d = root / subj.name
        d.mkdir(parents=True, exist_ok=True)
        for kind, sessions in (("event", subj.event_sessions), ("null", subj.null_sessions)):
            for i, s in enumerate(sessions):
                write_session(d / f"{kind}_{i:02d}.csv", s, d / f"{kind}_{i:02d}_events.csv")


def read_subjects(root) -> List[Subject]:
    """Inverse of :func:`write_subjects`; subjects and sessions in sorted order."""
    root = Path(root)
    subjects = []
    for d in sorted(p for p in root.iterdir() if p.is_dir()):
        subj = Subject(d.name)
        for kind, bucket in (("event", subj.event_sessions), ("null", subj.null_sessions)):
            for f in sorted(d.glob(f"{kind}_*.csv")):
                if f.stem.endswith("_events"):
                    continue
                ann = f.with_name(f.stem + "_events.csv")
                bucket.append(read_session(f, ann if ann.exists() else None, name=f.stem))
        subjects.append(subj)
    if not subjects:
        raise ValueError(f"{root}: no subject directories")
    return subjects
