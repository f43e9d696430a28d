"""
Signal conditioning and window extraction for multichannel sensor sessions.

Filters are causal so the same code path can run on a stream. Windows are
``(length, channels)`` float arrays, as everywhere else in the package.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal


@dataclass(frozen=True)
class EventSpan:
    start_s: float
    end_s: float
    label: str = "event"

    def __post_init__(self):
        if self.start_s > self.end_s:
            raise ValueError(f"event starts after it ends: {self.start_s} > {self.end_s}")


@dataclass
class SensorSession:
    """A recording: ``samples`` is ``(T, D)`` at ``sample_rate_hz``."""

    samples: np.ndarray
    sample_rate_hz: float
    channel_names: List[str]
    annotations: List[EventSpan] = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim == 1:
            self.samples = self.samples[:, None]
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise ValueError(f"samples must be (T, D) with T >= 1, got {self.samples.shape}")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if len(self.channel_names) != self.samples.shape[1]:
            raise ValueError(
                f"{len(self.channel_names)} channel names for {self.samples.shape[1]} channels"
            )
        dur = self.duration_s
        for ev in self.annotations:
            if ev.start_s < -1e-9 or ev.end_s > dur + 1e-9:
                raise ValueError(f"annotation {ev} lies outside [0, {dur}]")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz


@dataclass(frozen=True)
class FilterSpec:
    """Moving-average window (samples) and Butterworth high-pass settings.

    The default cutoff reads a 3*pi rad/s corner as 1.5 Hz.
    """

    moving_average_window: int = 10
    highpass_cutoff_hz: float = 1.5
    highpass_order: int = 2

    def __post_init__(self):
        if self.moving_average_window < 1:
            raise ValueError("moving_average_window must be >= 1")
        if self.highpass_cutoff_hz <= 0:
            raise ValueError("highpass_cutoff_hz must be positive")
        if self.highpass_order < 1:
            raise ValueError("highpass_order must be >= 1")

    def to_dict(self) -> dict:
        return {
            "moving_average_window": self.moving_average_window,
            "highpass_cutoff_hz": self.highpass_cutoff_hz,
            "highpass_order": self.highpass_order,
        }


def fingerprint(config: dict) -> str:
    """Stable digest of a JSON-serialisable configuration."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


def moving_average(session: SensorSession, window: int) -> SensorSession:
    """Causal trailing mean per channel; the first samples average what is available."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if window > session.n_samples:
        raise ValueError(f"window {window} longer than session ({session.n_samples} samples)")
    x = session.samples
    if window == 1:
        return replace(session, samples=x.copy())
    c = np.cumsum(np.vstack([np.zeros((1, x.shape[1])), x]), axis=0)
    t = np.arange(1, x.shape[0] + 1)
    lo = np.maximum(t - window, 0)
    return replace(session, samples=(c[t] - c[lo]) / (t - lo)[:, None])


def highpass_coefficients(spec: FilterSpec, fs: float) -> Tuple[np.ndarray, np.ndarray]:
    """Digital Butterworth high-pass (b, a) via the bilinear transform."""
    if spec.highpass_cutoff_hz >= fs / 2:
        raise ValueError(
            f"cutoff {spec.highpass_cutoff_hz} Hz is not below Nyquist ({fs / 2} Hz)"
        )
    return signal.butter(spec.highpass_order, spec.highpass_cutoff_hz, btype="highpass", fs=fs)


def butterworth_highpass(session: SensorSession, spec: FilterSpec = FilterSpec()) -> SensorSession:
    """Causal IIR high-pass, zero initial state, applied per channel."""
    b, a = highpass_coefficients(spec, session.sample_rate_hz)
    return replace(session, samples=signal.lfilter(b, a, session.samples, axis=0))


def apply_filters(session: SensorSession, spec: FilterSpec = FilterSpec()) -> SensorSession:
    """Moving average followed by the high-pass filter."""
    return butterworth_highpass(moving_average(session, spec.moving_average_window), spec)


def select_channels(session: SensorSession, names: Sequence[str]) -> SensorSession:
    missing = [n for n in names if n not in session.channel_names]
    if missing:
        raise KeyError(f"unknown channel(s) {missing}; session has {session.channel_names}")
    idx = [session.channel_names.index(n) for n in names]
    return replace(session, samples=session.samples[:, idx].copy(), channel_names=list(names))


def window_length(window_s: float, fs: float) -> int:
    n = window_s * fs
    if abs(n - round(n)) > 1e-6 or round(n) < 1:
        raise ValueError(f"window of {window_s} s at {fs} Hz is not a whole number of samples")
    return int(round(n))


def extract_event_windows(session: SensorSession, label: str, window_s: float) -> List[np.ndarray]:
    """One window per annotation with ``label``, centered on the span midpoint.

    Windows that would cross a session edge are shifted inward.
    """
    n = window_length(window_s, session.sample_rate_hz)
    if n > session.n_samples:
        raise ValueError(f"window of {n} samples longer than session ({session.n_samples})")
    out = []
    for ev in session.annotations:
        if ev.label != label:
            continue
        mid = 0.5 * (ev.start_s + ev.end_s) * session.sample_rate_hz
        start = int(math.floor(mid - n / 2 + 0.5))
        start = min(max(start, 0), session.n_samples - n)
        out.append(session.samples[start:start + n].copy())
    return out


def slide_windows(session: SensorSession, window_s: float,
                  stride_s: float) -> List[Tuple[int, np.ndarray]]:
    """Fully contained windows at a constant stride, as ``(start_index, window)``."""
    if stride_s <= 0:
        raise ValueError("stride_s must be positive")
    n = window_length(window_s, session.sample_rate_hz)
    step = int(round(stride_s * session.sample_rate_hz))
    if step < 1:
        raise ValueError(f"stride {stride_s} s is shorter than one sample")
    if n > session.n_samples:
        raise ValueError(f"window of {n} samples longer than session ({session.n_samples})")
    return [(s, session.samples[s:s + n].copy())
            for s in range(0, session.n_samples - n + 1, step)]


# ---------------------------------------------------------------------------
# CSV interchange


def write_annotations(path, annotations: Sequence[EventSpan]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["start_s", "end_s", "label"])
        for ev in annotations:
            w.writerow([repr(float(ev.start_s)), repr(float(ev.end_s)), ev.label])


def read_annotations(path) -> List[EventSpan]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return [EventSpan(float(r["start_s"]), float(r["end_s"]), r["label"]) for r in rows]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: expected columns start_s,end_s,label") from exc


def write_session(path, session: SensorSession, annotations_path=None):
    """Session CSV with header ``t,<channels...>``; annotations go to a sidecar."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + list(session.channel_names))
        for i, row in enumerate(session.samples):
            w.writerow([repr(i / session.sample_rate_hz)] + [repr(float(v)) for v in row])
    if annotations_path is not None:
        write_annotations(annotations_path, session.annotations)


def read_session(path, annotations_path=None, name: Optional[str] = None) -> SensorSession:
    """Load a session CSV; the sample rate comes from the median time step."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "t" or len(header) < 2:
            raise ValueError(f"{path}: header must be t,<ch1>,...")
        try:
            data = np.array([[float(v) for v in row] for row in reader if row])
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric value") from exc
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: need at least two complete rows")
    dt = np.diff(data[:, 0])
    if np.any(dt <= 0):
        raise ValueError(f"{path}: time column must be strictly increasing")
    med = float(np.median(dt))
    if np.any(np.abs(dt - med) > 0.01 * med):
        raise ValueError(f"{path}: sampling is not uniform within 1%")
    # strip float noise from printed time stamps
    fs = float(f"{1.0 / med:.9g}")
    ann = read_annotations(annotations_path) if annotations_path else []
    return SensorSession(
        samples=data[:, 1:],
        sample_rate_hz=fs,
        channel_names=header[1:],
        annotations=ann,
        name=name if name is not None else Path(path).stem,
    )
