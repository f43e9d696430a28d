"""
Augmentations for enlarging the positive training set.

Each function takes an explicit ``numpy.random.Generator``; when omitted one
is seeded from ``cfg.rng_seed``. ``augment_4x`` derives one substream per input
window from ``(rng_seed, index)`` so results do not depend on batch order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .distance import as_window


@dataclass(frozen=True)
class AugmentConfig:
    jitter_sigma: float = 0.03  # relative to per-channel std
    scale_sigma: float = 0.1
    warp_knots: int = 4
    warp_sigma: float = 0.2
    rng_seed: int = 0

    def __post_init__(self):
        if min(self.jitter_sigma, self.scale_sigma, self.warp_sigma) <= 0:
            raise ValueError("augmentation sigmas must be positive")
        if self.warp_knots < 2:
            raise ValueError("warp_knots must be >= 2")

    def to_dict(self) -> dict:
        return {
            "jitter_sigma": self.jitter_sigma,
            "scale_sigma": self.scale_sigma,
            "warp_knots": self.warp_knots,
            "warp_sigma": self.warp_sigma,
            "rng_seed": self.rng_seed,
        }


def _rng(cfg: AugmentConfig, rng: Optional[np.random.Generator]) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(cfg.rng_seed)


def jitter(w, cfg: AugmentConfig = AugmentConfig(), rng=None) -> np.ndarray:
    """Add Gaussian noise scaled by each channel's standard deviation."""
    w = as_window(w)
    std = w.std(axis=0)
    return w + _rng(cfg, rng).normal(size=w.shape) * (cfg.jitter_sigma * std)[None, :]


def scale(w, cfg: AugmentConfig = AugmentConfig(), rng=None) -> np.ndarray:
    """Multiply the whole window by one factor ~ N(1, scale_sigma), clamped to [0.1, 3]."""
    w = as_window(w)
    factor = float(np.clip(_rng(cfg, rng).normal(1.0, cfg.scale_sigma), 0.1, 3.0))
    return w * factor


def knot_positions(length: int, n_knots: int) -> np.ndarray:
    return np.linspace(0.0, max(length - 1, 1), n_knots)


def warp_envelope(length: int, knot_values: np.ndarray) -> np.ndarray:
    """Natural cubic spline through equally spaced knots, sampled at 0..length-1."""
    knots = knot_positions(length, len(knot_values))
    return CubicSpline(knots, knot_values, bc_type="natural")(np.arange(length))


def magnitude_warp(w, cfg: AugmentConfig = AugmentConfig(), rng=None) -> np.ndarray:
    """Multiply by a smooth random envelope shared across channels."""
    w = as_window(w)
    values = _rng(cfg, rng).normal(1.0, cfg.warp_sigma, size=cfg.warp_knots)
    return w * warp_envelope(w.shape[0], values)[:, None]


def augment_4x(windows: Sequence, cfg: AugmentConfig = AugmentConfig()) -> List[np.ndarray]:
    """Originals followed by one jittered, one scaled and one warped copy of each."""
    originals = [as_window(w) for w in windows]
    jittered, scaled, warped = [], [], []
    for i, w in enumerate(originals):
        rng = np.random.default_rng([cfg.rng_seed, i])
        jittered.append(jitter(w, cfg, rng))
        scaled.append(scale(w, cfg, rng))
        warped.append(magnitude_warp(w, cfg, rng))
    return originals + jittered + scaled + warped
