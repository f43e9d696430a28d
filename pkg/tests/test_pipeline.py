from dataclasses import replace

import numpy as np
import pytest

from mcctm.datasets import gen_imu_subjects
from mcctm.evaluation import THRESHOLD_SCALE
from mcctm.mcc import ORIGINAL
from mcctm.pipeline import (PipelineConfig, evaluate_sessions, losocv_sessions, pooled_roc, subject_windows,
                            train_pooled)


@pytest.fixture(scope="module")
def subjects():
    return gen_imu_subjects(3, seed=11, n_event_sessions=1, n_null_sessions=1, noise_sigma=0.3)


def test_subject_windows_counts(subjects):
    cfg = PipelineConfig()
    pos, neg = subject_windows(subjects[0], cfg)
    assert len(pos) == 4 * 8
    assert len(neg) == min(4 * len(pos), 97)
    assert all(w.shape == (20, 2) for w in pos + neg)


def test_fingerprint_tracks_preprocessing_and_variant():
    a = PipelineConfig()
    assert a.fingerprint() == PipelineConfig().fingerprint()
    assert a.fingerprint() != replace(a, window_s=0.5).fingerprint()
    assert a.fingerprint() != replace(a, channels=("x", "y", "z")).fingerprint()
    assert a.fingerprint() != replace(a, train=replace(a.train, variant=ORIGINAL)).fingerprint()


def test_train_pooled_ranks_and_tags(subjects):
    cfg = PipelineConfig()
    model, pooled = train_pooled(subjects, cfg)
    assert sorted(t.rank for t in model.templates) == list(range(1, model.k + 1))
    assert {t.source for t in model.templates} <= {s.name for s in subjects}
    assert model.preprocessing_fingerprint == cfg.fingerprint()
    counts = [t.coverage_count for t in model.ordered()]
    assert sum(counts) == len(pooled)


def test_evaluate_on_training_sessions(subjects):
    cfg = PipelineConfig()
    model, _ = train_pooled(subjects, cfg)
    ev = [s for subj in subjects for s in subj.event_sessions]
    nl = [s for subj in subjects for s in subj.null_sessions]
    rep = evaluate_sessions(model, ev, nl, cfg)
    assert rep.sensitivity == 1.0
    assert 0 <= rep.specificity <= 1 and 0 <= rep.auc <= 1
    assert len(rep.per_session) == len(ev) + len(nl)
    with pytest.raises(ValueError):
        evaluate_sessions(model, ev, [], cfg)


def test_losocv_sessions_deterministic(subjects):
    cfg = PipelineConfig()
    a = losocv_sessions(subjects, cfg, THRESHOLD_SCALE)
    b = losocv_sessions(subjects, cfg, THRESHOLD_SCALE)
    assert a.to_json() == b.to_json()
    assert len(a.folds) == 3
    for f in a.folds:
        assert f.subject not in f.template_sources
    curve = pooled_roc(a)
    assert len(curve) == 50
    with pytest.raises(ValueError):
        losocv_sessions(subjects[:1], cfg)


def test_session_model_scores_between_classes(subjects):
    cfg = PipelineConfig()
    rep = losocv_sessions(subjects, cfg)
    assert rep.auc > 0.6
    assert np.isfinite([rep.sensitivity, rep.specificity]).all()
