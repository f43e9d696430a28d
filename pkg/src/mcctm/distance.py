"""
Distance kernels between multichannel windows.

A window is a 2-D float array of shape ``(length, channels)``. Two kernels are
provided: a flat Euclidean distance over all elements, and dependent
multivariate DTW whose local cost is the Euclidean distance between frames.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np
from scipy.spatial.distance import cdist

# an outdated system TBB makes numba fall back to OpenMP; the notice is noise
warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)

EUCLIDEAN = "euclidean_flat"
DTW = "dtw_dependent"
KINDS = (EUCLIDEAN, DTW)


def as_window(x) -> np.ndarray:
    """Coerce ``x`` into a float64 ``(length, channels)`` array.

    1-D input is treated as a single-channel series. Raises ``ValueError`` for
    empty or non-finite input.
    """
    w = np.asarray(x, dtype=np.float64)
    if w.ndim == 1:
        w = w[:, None]
    if w.ndim != 2:
        raise ValueError(f"window must be 1-D or 2-D, got shape {w.shape}")
    if w.shape[0] < 1 or w.shape[1] < 1:
        raise ValueError(f"window must be non-empty, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("window contains non-finite values")
    return w


@dataclass(frozen=True)
class DistanceSpec:
    """Which kernel to use, and the Sakoe-Chiba half-width for DTW.

    ``band_radius=None`` means unconstrained DTW. Ignored by the flat kernel.
    """

    kind: str = EUCLIDEAN
    band_radius: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distance kind {self.kind!r}; expected one of {KINDS}")
        if self.band_radius is not None and self.band_radius < 0:
            raise ValueError("band_radius must be non-negative")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "band_radius": self.band_radius}

    @classmethod
    def from_dict(cls, d: dict) -> "DistanceSpec":
        return cls(kind=d["kind"], band_radius=d.get("band_radius"))


def euclidean_flat(a, b) -> float:
    """Euclidean distance between two windows of identical shape."""
    a = as_window(a)
    b = as_window(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(cdist(a.reshape(1, -1), b.reshape(1, -1))[0, 0])


@numba.njit(cache=True)
def _dtw_kernel(a, b, band):
    la, lb = a.shape[0], b.shape[0]
    nd = a.shape[1]
    acc = np.full((la, lb), np.inf)
    for i in range(la):
        if band < 0:
            j0, j1 = 0, lb
        else:
            j0, j1 = max(0, i - band), min(lb, i + band + 1)
        for j in range(j0, j1):
            s = 0.0
            for d in range(nd):
                diff = a[i, d] - b[j, d]
                s += diff * diff
            cost = np.sqrt(s)
            if i == 0 and j == 0:
                acc[i, j] = cost
                continue
            best = np.inf
            if i > 0 and acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if j > 0 and acc[i, j - 1] < best:
                best = acc[i, j - 1]
            if i > 0 and j > 0 and acc[i - 1, j - 1] < best:
                best = acc[i - 1, j - 1]
            acc[i, j] = cost + best
    return acc[la - 1, lb - 1]


@numba.njit(cache=True, parallel=True)
def _dtw_matrix(xs, x_off, x_len, ys, y_off, y_len, band):
    n, m = x_len.shape[0], y_len.shape[0]
    out = np.empty((n, m))
    for p in numba.prange(n * m):
        i, j = p // m, p % m
        a = xs[x_off[i]:x_off[i] + x_len[i]]
        b = ys[y_off[j]:y_off[j] + y_len[j]]
        out[i, j] = _dtw_kernel(a, b, band)
    return out


def _check_band(la: int, lb: int, spec: DistanceSpec):
    if spec.band_radius is not None and spec.band_radius < abs(la - lb):
        raise ValueError(
            f"band_radius {spec.band_radius} admits no warping path between "
            f"lengths {la} and {lb}"
        )


def dtw_dependent(a, b, spec: DistanceSpec = DistanceSpec(DTW)) -> float:
    """Dependent multivariate DTW with unsquared Euclidean frame cost.

    Returns the raw cumulative cost of the cheapest monotone path using steps
    (1,0), (0,1), (1,1) from the first frame pair to the last; no length
    normalisation is applied.
    """
    a = as_window(a)
    b = as_window(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"channel mismatch: {a.shape} vs {b.shape}")
    _check_band(a.shape[0], b.shape[0], spec)
    band = -1 if spec.band_radius is None else int(spec.band_radius)
    return float(_dtw_kernel(a, b, band))


def distance(a, b, spec: DistanceSpec) -> float:
    """Dispatch to the kernel named by ``spec``."""
    if spec.kind == EUCLIDEAN:
        return euclidean_flat(a, b)
    return dtw_dependent(a, b, spec)


def _pack(windows: Sequence[np.ndarray]):
    lens = np.array([w.shape[0] for w in windows], dtype=np.int64)
    offs = np.zeros(len(windows), dtype=np.int64)
    if len(windows) > 1:
        offs[1:] = np.cumsum(lens)[:-1]
    return np.ascontiguousarray(np.concatenate(windows, axis=0)), offs, lens


def pairwise(xs: Sequence, ys: Sequence, spec: DistanceSpec) -> np.ndarray:
    """Distance matrix of shape ``(len(xs), len(ys))``.

    Each entry is bit-identical to the corresponding single-pair call, so
    radii learned from a matrix agree exactly with distances at inference.
    """
    xs = [as_window(x) for x in xs]
    ys = [as_window(y) for y in ys]
    if not xs or not ys:
        return np.zeros((len(xs), len(ys)))
    channels = {w.shape[1] for w in xs} | {w.shape[1] for w in ys}
    if len(channels) != 1:
        raise ValueError(f"channel mismatch among windows: {sorted(channels)}")
    if spec.kind == EUCLIDEAN:
        shapes = {w.shape for w in xs} | {w.shape for w in ys}
        if len(shapes) != 1:
            raise ValueError(f"shape mismatch among windows: {sorted(shapes)}")
        return cdist(np.stack([x.ravel() for x in xs]), np.stack([y.ravel() for y in ys]))
    if spec.band_radius is not None:
        lx = [w.shape[0] for w in xs]
        ly = [w.shape[0] for w in ys]
        if max(lx) - min(ly) >= max(ly) - min(lx):
            _check_band(max(lx), min(ly), spec)
        else:
            _check_band(max(ly), min(lx), spec)
    band = -1 if spec.band_radius is None else int(spec.band_radius)
    px, ox, lx_ = _pack(xs)
    py, oy, ly_ = _pack(ys)
    return _dtw_matrix(px, ox, lx_, py, oy, ly_, band)
