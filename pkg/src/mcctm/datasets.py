"""
Synthetic generators and file loaders.

Every generator is deterministic in its ``seed``. Labelled sets can be written
to a flat ``samples.csv`` (``label,ch0_t0,ch0_t1,...``, channel-major) with a
``shape.json`` sidecar, and read back unchanged.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .distance import as_window
from .preprocess import EventSpan, SensorSession

SNOWMAN_SIZE = 1334
SNOWMAN_POSITIVES = 889
SNOWMAN_NEGATIVES = SNOWMAN_SIZE - SNOWMAN_POSITIVES


@dataclass
class LabeledSet:
    """Windows with binary labels and an optional train/test split."""

    samples: List[np.ndarray]
    labels: np.ndarray
    name: str = ""
    split: Optional[Dict[str, np.ndarray]] = None
    groups: Optional[List[str]] = field(default=None, repr=False)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=bool)
        if len(self.samples) != len(self.labels):
            raise ValueError(f"{len(self.samples)} samples but {len(self.labels)} labels")
        if self.split is not None:
            tr = np.asarray(self.split["train"], dtype=int)
            te = np.asarray(self.split["test"], dtype=int)
            if len(np.intersect1d(tr, te)):
                raise ValueError("train and test indices overlap")
            n = len(self.samples)
            if len(tr) and (tr.min() < 0 or tr.max() >= n) or len(te) and (te.min() < 0 or te.max() >= n):
                raise ValueError("split index out of range")
            self.split = {"train": tr, "test": te}

    def __len__(self):
        return len(self.samples)

    def subset(self, indices) -> "LabeledSet":
        idx = np.asarray(indices, dtype=int)
        return LabeledSet([self.samples[i] for i in idx], self.labels[idx], self.name)

    def part(self, which: str) -> "LabeledSet":
        """``"train"``, ``"test"`` or ``"all"``."""
        if which == "all":
            return self
        if self.split is None:
            raise ValueError(f"{self.name or 'dataset'} has no recorded split")
        return self.subset(self.split[which])

    @property
    def positives(self) -> List[np.ndarray]:
        return [s for s, y in zip(self.samples, self.labels) if y]

    @property
    def negatives(self) -> List[np.ndarray]:
        return [s for s, y in zip(self.samples, self.labels) if not y]


def random_split(n: int, rng: np.random.Generator, train_fraction: float = 0.7) -> Dict[str, np.ndarray]:
    perm = rng.permutation(n)
    n_train = int(round(train_fraction * n))
    return {"train": np.sort(perm[:n_train]), "test": np.sort(perm[n_train:])}


def gen_blobs(n_pos: int, n_neg: int, mu_pos, mu_neg, sigma_pos: float, sigma_neg: float,
              seed: int = 0, name: str = "blobs", train_fraction: float = 0.7) -> LabeledSet:
    """Two isotropic Gaussian classes; each point becomes a ``(1, dim)`` window.

    Samples are shuffled and a random 70/30 split is recorded.
    """
    if n_pos < 0 or n_neg < 0 or n_pos + n_neg == 0:
        raise ValueError("sample counts must be non-negative and not both zero")
    if sigma_pos <= 0 or sigma_neg <= 0:
        raise ValueError("sigmas must be positive")
    mu_pos = np.asarray(mu_pos, dtype=float)
    mu_neg = np.asarray(mu_neg, dtype=float)
    if mu_pos.shape != mu_neg.shape or mu_pos.ndim != 1:
        raise ValueError("mu_pos and mu_neg must be vectors of equal length")
    rng = np.random.default_rng(seed)
    pos = rng.normal(mu_pos, sigma_pos, size=(n_pos, len(mu_pos)))
    neg = rng.normal(mu_neg, sigma_neg, size=(n_neg, len(mu_neg)))
    x = np.vstack([pos, neg])
    y = np.r_[np.ones(n_pos, bool), np.zeros(n_neg, bool)]
    order = rng.permutation(len(y))
    x, y = x[order], y[order]
    return LabeledSet([row[None, :].copy() for row in x], y, name,
                      split=random_split(len(y), rng, train_fraction))


def gen_snowman(seed: int = 0) -> LabeledSet:
    """1334 points: 889 positives from N((0,0), 3^2 I), 445 negatives from N((0,3), I).

    The larger Gaussian is taken as the positive class so positives outnumber
    negatives about 2:1.
    """
    return gen_blobs(SNOWMAN_POSITIVES, SNOWMAN_NEGATIVES, (0.0, 0.0), (0.0, 3.0), 3.0, 1.0,
                     seed=seed, name="snowman")


# ---------------------------------------------------------------------------
# UCR archive


def _parse_label(tok: str):
    v = float(tok)
    return int(v) if v.is_integer() else v


def read_ucr(path):
    """Raw rows of a UCR file: (labels list, ``(n, length)`` array)."""
    labels, rows = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            toks = re.split(r"[,\t ]+", line)
            if len(toks) < 2:
                raise ValueError(f"{path}:{lineno}: row has no values")
            try:
                labels.append(_parse_label(toks[0]))
                rows.append([float(t) for t in toks[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row") from exc
    lengths = {len(r) for r in rows}
    if len(lengths) > 1:
        raise ValueError(f"{path}: series lengths differ ({sorted(lengths)})")
    return labels, np.array(rows, dtype=np.float64)


def load_ucr(path, pos_classes, neg_classes, seed: Optional[int] = None,
             train_fraction: float = 0.7) -> LabeledSet:
    """Binary set from a UCR file given which classes count as positive/negative.

    Rows from other classes are dropped; row order is kept. With ``seed`` a
    random train/test split is recorded.
    """
    pos_classes, neg_classes = set(pos_classes), set(neg_classes)
    if not pos_classes or not neg_classes:
        raise ValueError("both class sets must be non-empty")
    if pos_classes & neg_classes:
        raise ValueError(f"classes {sorted(pos_classes & neg_classes)} are both positive and negative")
    labels, x = read_ucr(path)
    keep = [i for i, c in enumerate(labels) if c in pos_classes or c in neg_classes]
    samples = [x[i][:, None].copy() for i in keep]
    y = np.array([labels[i] in pos_classes for i in keep], dtype=bool)
    split = None
    if seed is not None:
        split = random_split(len(keep), np.random.default_rng(seed), train_fraction)
    return LabeledSet(samples, y, Path(path).stem, split=split)


# ---------------------------------------------------------------------------
# event sessions


def gen_event_sessions(n_sessions: int, event_template, events_per_session: int,
                       noise_sigma: float, fs: float, seed: int = 0, duration_s: float = 10.0,
                       min_gap_s: float = 0.5, label: str = "event",
                       channel_names: Optional[Sequence[str]] = None,
                       amplitude_sigma: float = 0.0) -> List[SensorSession]:
    """Gaussian-noise sessions with the template added at random, non-overlapping times.

    ``amplitude_sigma`` optionally scales each injected event by a factor
    drawn from N(1, amplitude_sigma).
    """
    tmpl = as_window(event_template)
    n_ev, d = tmpl.shape
    t_total = int(round(duration_s * fs))
    gap = int(round(min_gap_s * fs))
    free = t_total - events_per_session * n_ev - max(events_per_session - 1, 0) * gap
    if n_sessions < 0 or events_per_session < 0:
        raise ValueError("counts must be non-negative")
    if free < 0:
        raise ValueError(
            f"{events_per_session} events of {n_ev} samples do not fit in {t_total} samples"
        )
    if channel_names is None:
        channel_names = ["x", "y", "z"][:d] if d <= 3 else [f"ch{i}" for i in range(d)]
    rng = np.random.default_rng(seed)
    sessions = []
    for s in range(n_sessions):
        x = rng.normal(0.0, noise_sigma, size=(t_total, d)) if noise_sigma > 0 else np.zeros((t_total, d))
        offsets = np.sort(rng.integers(0, free + 1, size=events_per_session))
        ann = []
        for i, off in enumerate(offsets):
            start = int(off) + i * (n_ev + gap)
            amp = rng.normal(1.0, amplitude_sigma) if amplitude_sigma > 0 else 1.0
            x[start:start + n_ev] += amp * tmpl
            ann.append(EventSpan(start / fs, (start + n_ev) / fs, label))
        sessions.append(SensorSession(x, fs, list(channel_names), ann, name=f"session_{s:03d}"))
    return sessions


# ---------------------------------------------------------------------------
# flat-file interchange


def write_samples(out_dir, data: LabeledSet):
    """Write ``samples.csv`` and ``shape.json`` (plus ``split.json`` when split)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    shapes = {s.shape for s in data.samples}
    if len(shapes) != 1:
        raise ValueError("samples.csv needs windows of one shape")
    length, channels = shapes.pop()
    with open(out / "samples.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label"] + [f"ch{c}_t{t}" for c in range(channels) for t in range(length)])
        for s, y in zip(data.samples, data.labels):
            w.writerow([int(y)] + [repr(float(v)) for v in s.T.ravel()])
    (out / "shape.json").write_text(json.dumps(
        {"name": data.name, "length": length, "channels": channels}, indent=1) + "\n")
    if data.split is not None:
        (out / "split.json").write_text(json.dumps(
            {k: v.tolist() for k, v in data.split.items()}) + "\n")


def read_samples(data_dir) -> LabeledSet:
    d = Path(data_dir)
    shape = json.loads((d / "shape.json").read_text())
    length, channels = int(shape["length"]), int(shape["channels"])
    samples, labels = [], []
    with open(d / "samples.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for lineno, row in enumerate(reader, 2):
            if len(row) != 1 + length * channels:
                raise ValueError(f"{d / 'samples.csv'}:{lineno}: expected {1 + length * channels} fields")
            labels.append(row[0].strip() in ("1", "true", "True"))
            samples.append(np.array(row[1:], dtype=np.float64).reshape(channels, length).T.copy())
    split = None
    if (d / "split.json").exists():
        split = json.loads((d / "split.json").read_text())
    return LabeledSet(samples, np.array(labels, dtype=bool), shape.get("name", ""), split=split)


# ---------------------------------------------------------------------------
# synthetic IMU subjects


def _gauss(t, c, w):
    return np.exp(-0.5 * ((t - c) / w) ** 2)


def burst_template(n: int = 20, amplitude: float = 1.0) -> np.ndarray:
    """Short biphasic jolt, strongest on x: the event to detect."""
    t = np.arange(n, dtype=float)
    c = (n - 1) / 2
    x = -(t - c) / 1.5 * _gauss(t, c, 1.5)
    y = 0.7 * _gauss(t, c + 1, 2.0)
    z = 0.2 * np.sin(2 * np.pi * t / n) * _gauss(t, c, 4.0)
    return amplitude * np.stack([x, y, z], axis=1)


def sway_template(n: int = 20, amplitude: float = 1.0) -> np.ndarray:
    """Slower, smoother head motion used as a confounder."""
    t = np.arange(n, dtype=float)
    hann = np.sin(np.pi * (t + 0.5) / n) ** 2
    x = np.sin(2 * np.pi * t / n) * hann
    y = 0.6 * np.sin(4 * np.pi * t / n) * hann
    z = 0.3 * hann
    return amplitude * np.stack([x, y, z], axis=1)


def gen_imu_subjects(n_subjects: int = 5, seed: int = 0, n_event_sessions: int = 2,
                     n_null_sessions: int = 2, events_per_session: int = 8,
                     confounders_per_session: int = 8, duration_s: float = 10.0,
                     noise_sigma: float = 0.5, fs: float = 50.0,
                     subject_sigma: float = 0.15, gravity: Sequence[float] = (0.0, 0.0, 1.0)):
    """Three-axis sessions per subject: event sessions hold annotated bursts,
    event-free sessions hold unannotated sway confounders.

    Each subject has its own amplitude factor and both kinds of session carry
    gravity plus a slow postural drift, which the high-pass filter removes.
    """
    from .pipeline import Subject

    rng = np.random.default_rng(seed)
    n = int(round(0.4 * fs))
    subjects = []
    for i in range(n_subjects):
        amp = float(np.clip(rng.normal(1.0, subject_sigma), 0.5, 1.5))
        sub_seed = int(rng.integers(2**31))
        ev = gen_event_sessions(n_event_sessions, burst_template(n, amp), events_per_session,
                                noise_sigma, fs, seed=sub_seed, duration_s=duration_s,
                                amplitude_sigma=0.2)
        nl = gen_event_sessions(n_null_sessions, sway_template(n, amp), confounders_per_session,
                                noise_sigma, fs, seed=sub_seed + 1, duration_s=duration_s,
                                label="confounder", amplitude_sigma=0.2)
        drift_rng = np.random.default_rng([seed, i])
        for j, s in enumerate(ev + nl):
            t = np.arange(s.n_samples) / fs
            phase = drift_rng.uniform(0, 2 * np.pi)
            s.samples += np.asarray(gravity)[None, :] + 0.3 * np.sin(2 * np.pi * 0.1 * t + phase)[:, None]
            s.name = f"{'event' if j < len(ev) else 'null'}_{j if j < len(ev) else j - len(ev):02d}"
        for s in nl:
            s.annotations = []
        subjects.append(Subject(f"subject_{i:02d}", ev, nl))
    return subjects
