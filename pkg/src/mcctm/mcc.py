"""
Multi-Center Classifier: sensitivity-prioritised template matching.

Training grows a set of clusters over the positive samples. Each cluster
yields a template: a center window plus a radius that covers every positive
assigned to it. At inference a sample is positive when it falls inside the
ball of any of the (top-ranked) templates.

Two training variants are available. ``"improved"`` assigns each positive to
exactly one (nearest) cluster, re-centers on the minimax medoid, and seeds new
clusters with the positive that drags the most negatives into its cluster
ball. ``"original"`` lets positives join every cluster whose ball covers
them, re-centers on the elementwise mean, and seeds new clusters at a random
positive of the worst cluster. The original variant's membership rule is a
reconstruction kept for comparison experiments.
"""
from __future__ import annotations

import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .distance import DistanceSpec, as_window, pairwise

log = logging.getLogger(__name__)

IMPROVED = "improved"
ORIGINAL = "original"
VARIANTS = (IMPROVED, ORIGINAL)
FORMAT_VERSION = 1
SCORE_SENTINEL = sys.float_info.max


@dataclass
class Template:
    """A center window and the radius of its coverage ball."""

    center: np.ndarray
    radius: float
    rank: Optional[int] = None
    coverage_count: int = 0
    source: Optional[str] = None

    def to_dict(self) -> dict:
        d = {
            "center": self.center.tolist(),
            "radius": float(self.radius),
            "rank": self.rank,
            "coverage_count": int(self.coverage_count),
        }
        if self.source is not None:
            d["source"] = self.source
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Template":
        return cls(
            center=np.asarray(d["center"], dtype=np.float64),
            radius=float(d["radius"]),
            rank=d.get("rank"),
            coverage_count=int(d.get("coverage_count", 0)),
            source=d.get("source"),
        )


@dataclass
class ClusterState:
    """Clustering of the positives for a fixed set of centers.

    ``assignments[i]`` is the cluster of positive ``i`` (nearest center).
    ``members[k]`` lists the positives of cluster ``k``; under the original
    variant a positive may appear in several clusters.
    """

    assignments: np.ndarray
    members: List[np.ndarray]
    centers: List[np.ndarray]
    radii: np.ndarray
    per_cluster_cost: np.ndarray
    center_index: Optional[List[int]] = None

    @property
    def total_cost(self) -> float:
        return float(np.sum(self.per_cluster_cost))

    @property
    def k(self) -> int:
        return len(self.centers)


@dataclass(frozen=True)
class TrainConfig:
    """Training parameters.

    Exactly one stopping rule applies: ``stop_cost`` (stop once the total
    cost is at most H) or ``stop_precision`` (stop once training precision
    reaches p). If neither is given the precision rule with p=0.8 is used.
    """

    stop_cost: Optional[float] = None
    stop_precision: Optional[float] = None
    max_clusters: int = 50
    variant: str = IMPROVED
    distance: DistanceSpec = field(default_factory=DistanceSpec)
    rng_seed: int = 0
    max_inner_iter: int = 50

    def __post_init__(self):
        if self.stop_cost is not None and self.stop_precision is not None:
            raise ValueError("give either stop_cost or stop_precision, not both")
        if self.stop_cost is None and self.stop_precision is None:
            object.__setattr__(self, "stop_precision", 0.8)
        if self.stop_cost is not None and self.stop_cost < 0:
            raise ValueError("stop_cost must be non-negative")
        if self.stop_precision is not None and not 0 < self.stop_precision <= 1:
            raise ValueError("stop_precision must lie in (0, 1]")
        if self.max_clusters < 1:
            raise ValueError("max_clusters must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be unsigned")

    def to_dict(self) -> dict:
        return {
            "stop_cost": self.stop_cost,
            "stop_precision": self.stop_precision,
            "max_clusters": self.max_clusters,
            "variant": self.variant,
            "distance": self.distance.to_dict(),
            "rng_seed": self.rng_seed,
            "max_inner_iter": self.max_inner_iter,
        }


@dataclass
class TrainTrace:
    """Per outer iteration: number of clusters, total cost, training precision."""

    rows: List[Tuple[int, float, float]] = field(default_factory=list)
    converged: bool = False
    warning: Optional[str] = None

    def to_csv(self) -> str:
        lines = ["K,L,precision"]
        lines += [f"{k},{cost!r},{prec!r}" for k, cost, prec in self.rows]
        return "\n".join(lines) + "\n"


@dataclass
class MccModel:
    """Trained classifier: templates in rank order plus distance settings."""

    templates: List[Template]
    distance: DistanceSpec
    window_shape: Tuple[int, int]
    preprocessing_fingerprint: str = ""

    def __post_init__(self):
        if not self.templates:
            raise ValueError("a model needs at least one template")
        ranks = [t.rank for t in self.templates]
        if any(r is not None for r in ranks):
            if sorted(r for r in ranks if r is not None) != list(range(1, len(ranks) + 1)):
                raise ValueError("template ranks must be a permutation of 1..K")

    @property
    def k(self) -> int:
        return len(self.templates)

    def ordered(self) -> List[Template]:
        """Templates in rank order (list order when unranked)."""
        if self.templates[0].rank is None:
            return list(self.templates)
        return sorted(self.templates, key=lambda t: t.rank)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "distance": self.distance.to_dict(),
            "window_shape": list(self.window_shape),
            "preprocessing_fingerprint": self.preprocessing_fingerprint,
            "templates": [t.to_dict() for t in self.templates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "MccModel":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version {d.get('format_version')!r}")
        return cls(
            templates=[Template.from_dict(t) for t in d["templates"]],
            distance=DistanceSpec.from_dict(d["distance"]),
            window_shape=tuple(d["window_shape"]),
            preprocessing_fingerprint=d.get("preprocessing_fingerprint", ""),
        )

    @classmethod
    def from_json(cls, text: str) -> "MccModel":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> int:
        """Write the model JSON; returns the number of bytes written."""
        data = self.to_json().encode()
        Path(path).write_bytes(data)
        return len(data)

    @classmethod
    def load(cls, path) -> "MccModel":
        return cls.from_json(Path(path).read_text())


# ---------------------------------------------------------------------------
# building blocks


def _minimax_medoid(dmat: np.ndarray) -> int:
    # first index wins ties
    return int(np.argmin(dmat.max(axis=1)))


def _require(windows, what):
    if len(windows) == 0:
        raise ValueError(f"{what} must be non-empty")


def cluster_assign(centers: Sequence, positives: Sequence, spec: DistanceSpec,
                   variant: str = IMPROVED):
    """Assign positives to clusters.

    Improved variant: returns an int array mapping each positive to its
    nearest center (lowest index on ties). Original variant: returns one
    sorted list of cluster indices per positive, holding every cluster whose
    ball (radius over its nearest-assigned members) covers the positive.
    """
    _require(centers, "centers")
    _require(positives, "positives")
    d = pairwise(positives, centers, spec)
    nearest = np.argmin(d, axis=1)
    if variant == IMPROVED:
        return nearest
    radii = np.zeros(len(centers))
    for k in range(len(centers)):
        sel = nearest == k
        if sel.any():
            radii[k] = d[sel, k].max()
    covered = d <= radii[None, :]
    covered[np.arange(len(positives)), nearest] = True
    return [np.flatnonzero(row).tolist() for row in covered]


def update_center(cluster_positives: Sequence, spec: DistanceSpec,
                  variant: str = IMPROVED) -> np.ndarray:
    """New center of a cluster.

    Improved: the member with the smallest maximum distance to the other
    members. Original: the elementwise mean (members must share a length).
    """
    _require(cluster_positives, "cluster")
    members = [as_window(w) for w in cluster_positives]
    if variant == ORIGINAL:
        if len({w.shape for w in members}) != 1:
            raise ValueError("mean center requires windows of equal shape")
        return np.mean(np.stack(members), axis=0)
    return members[_minimax_medoid(pairwise(members, members, spec))]


def derive_threshold(center, cluster_positives: Sequence, spec: DistanceSpec) -> float:
    """Radius covering every member: the largest center-to-member distance."""
    _require(cluster_positives, "cluster")
    return float(pairwise([center], cluster_positives, spec).max())


def cluster_cost(center, radius: float, negatives: Sequence, spec: DistanceSpec) -> int:
    """Number of negatives inside the ball of ``radius`` around ``center``."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if len(negatives) == 0:
        return 0
    return int(np.sum(pairwise([center], negatives, spec)[0] <= radius))


def _seed_order(d_center_members: np.ndarray, d_center_neg: np.ndarray) -> np.ndarray:
    """Member positions sorted best-first for seeding."""
    neg_sorted = np.sort(d_center_neg)
    increase = np.searchsorted(neg_sorted, d_center_members, side="right")
    idx = np.arange(len(d_center_members))
    # lexsort: last key is primary
    return np.lexsort((idx, -d_center_members, -increase))


def select_seed(worst_cluster_positives: Sequence, center, negatives: Sequence,
                spec: DistanceSpec) -> np.ndarray:
    """Positive of the worst cluster whose coverage traps the most negatives.

    The cost increase of member ``p`` is the number of negatives at most
    ``dist(center, p)`` from the center. Ties go to the farther member, then
    to the lower index.
    """
    _require(worst_cluster_positives, "cluster")
    members = [as_window(w) for w in worst_cluster_positives]
    dm = pairwise([center], members, spec)[0]
    dn = pairwise([center], negatives, spec)[0] if len(negatives) else np.zeros(0)
    return members[int(_seed_order(dm, dn)[0])]


# ---------------------------------------------------------------------------
# training


class _Trainer:
    def __init__(self, positives, negatives, config: TrainConfig):
        self.pos = positives
        self.neg = negatives
        self.cfg = config
        self.spec = config.distance
        self.rng = np.random.default_rng(config.rng_seed)
        self.n_pos = len(positives)
        if config.variant == IMPROVED:
            self.dpp = pairwise(positives, positives, self.spec)
            self.dpn = pairwise(positives, negatives, self.spec)

    # -- improved variant: centers are positive indices ------------------

    def _state_improved(self, centers: List[int]) -> ClusterState:
        assign = np.argmin(self.dpp[:, centers], axis=1)
        members, new_centers, radii = [], [], np.zeros(len(centers))
        for k in range(len(centers)):
            m = np.flatnonzero(assign == k)
            if len(m) == 0:
                # only possible for duplicate centers; keep a degenerate ball
                members.append(m)
                new_centers.append(centers[k])
                continue
            c = int(m[_minimax_medoid(self.dpp[np.ix_(m, m)])])
            members.append(m)
            new_centers.append(c)
            radii[k] = self.dpp[c, m].max()
        cost = np.array([np.sum(self.dpn[c] <= r) for c, r in zip(new_centers, radii)],
                        dtype=float)
        return ClusterState(
            assignments=assign,
            members=members,
            centers=[self.pos[c] for c in new_centers],
            radii=radii,
            per_cluster_cost=cost,
            center_index=new_centers,
        )

    def _cluster_improved(self, centers: List[int]) -> ClusterState:
        seen = set()
        best = None
        for _ in range(self.cfg.max_inner_iter):
            key = tuple(centers)
            if key in seen:
                log.debug("inner clustering cycled with K=%d", len(centers))
                return best
            seen.add(key)
            state = self._state_improved(centers)
            if best is None or state.total_cost < best.total_cost:
                best = state
            if state.center_index == centers:
                return state
            centers = state.center_index
        return best

    # -- original variant: centers are mean windows -----------------------

    def _state_original(self, centers: List[np.ndarray]):
        d = pairwise(centers, self.pos, self.spec)
        nearest = np.argmin(d, axis=0)
        k = len(centers)
        r0 = np.zeros(k)
        for j in range(k):
            sel = nearest == j
            if sel.any():
                r0[j] = d[j, sel].max()
        covered = d <= r0[:, None]
        covered[nearest, np.arange(self.n_pos)] = True
        members = [np.flatnonzero(covered[j]) for j in range(k)]
        new_centers = [
            np.mean(np.stack([self.pos[i] for i in m]), axis=0) if len(m) else centers[j]
            for j, m in enumerate(members)
        ]
        dnew = pairwise(new_centers, self.pos, self.spec)
        radii = np.array([dnew[j, m].max() if len(m) else 0.0 for j, m in enumerate(members)])
        if len(self.neg):
            dneg = pairwise(new_centers, self.neg, self.spec)
            cost = np.sum(dneg <= radii[:, None], axis=1).astype(float)
        else:
            cost = np.zeros(k)
        state = ClusterState(
            assignments=nearest,
            members=members,
            centers=new_centers,
            radii=radii,
            per_cluster_cost=cost,
        )
        return state, covered

    def _cluster_original(self, centers: List[np.ndarray]) -> ClusterState:
        seen = set()
        best, last = None, None
        for _ in range(self.cfg.max_inner_iter):
            state, covered = self._state_original(centers)
            key = np.packbits(covered).tobytes()
            if key == last:
                return state
            if best is None or state.total_cost < best.total_cost:
                best = state
            if key in seen:
                return best
            seen.add(key)
            last = key
            centers = state.centers
        return best

    # -- shared ------------------------------------------------------------

    def precision(self, state: ClusterState) -> float:
        spec = self.spec
        if state.center_index is not None:
            dp = self.dpp[state.center_index]
            dn = self.dpn[state.center_index]
        else:
            dp = pairwise(state.centers, self.pos, spec)
            dn = pairwise(state.centers, self.neg, spec) if len(self.neg) else np.zeros((state.k, 0))
        tp = int(np.any(dp <= state.radii[:, None], axis=0).sum())
        fp = int(np.any(dn <= state.radii[:, None], axis=0).sum()) if dn.size else 0
        return tp / (tp + fp) if tp + fp else 0.0

    def stop(self, state: ClusterState, prec: float) -> bool:
        if self.cfg.stop_cost is not None:
            return state.total_cost <= self.cfg.stop_cost
        return prec >= self.cfg.stop_precision

    def next_seed(self, state: ClusterState):
        t = int(np.argmax(state.per_cluster_cost))
        members = state.members[t]
        if self.cfg.variant == ORIGINAL:
            if len(members) == 0:
                return None
            return self.pos[int(self.rng.choice(members))].copy()
        c = state.center_index[t]
        taken = set(state.center_index)
        cand = np.array([i for i in members if i not in taken], dtype=int)
        if len(cand) == 0:
            return None
        order = _seed_order(self.dpp[c, cand], self.dpn[c])
        return int(cand[order[0]])

    def run(self) -> Tuple[ClusterState, TrainTrace]:
        trace = TrainTrace()
        first = int(self.rng.integers(self.n_pos))
        if self.cfg.variant == IMPROVED:
            centers = [first]
            state = self._cluster_improved(centers)
        else:
            state = self._cluster_original([self.pos[first].copy()])
        prec = self.precision(state)
        trace.rows.append((state.k, state.total_cost, prec))
        while not self.stop(state, prec):
            if state.k >= self.cfg.max_clusters:
                trace.warning = (
                    f"max_clusters={self.cfg.max_clusters} reached before the stop criterion"
                )
                log.warning(trace.warning)
                return state, trace
            seed = self.next_seed(state)
            if seed is None:
                trace.warning = "no seed candidate left in the worst cluster"
                log.warning(trace.warning)
                return state, trace
            if self.cfg.variant == IMPROVED:
                state = self._cluster_improved(list(state.center_index) + [seed])
            else:
                state = self._cluster_original(list(state.centers) + [seed])
            prec = self.precision(state)
            trace.rows.append((state.k, state.total_cost, prec))
        trace.converged = True
        return state, trace


def train(positives: Sequence, negatives: Sequence, config: TrainConfig = TrainConfig(),
          fingerprint: str = "") -> Tuple[MccModel, TrainTrace]:
    """Train a model on positive and negative windows.

    Returns the (unranked) model and the per-iteration trace. Hitting
    ``max_clusters`` before the stop rule holds is reported through
    ``trace.warning`` rather than an exception.
    """
    _require(positives, "positives")
    pos = [as_window(w) for w in positives]
    neg = [as_window(w) for w in negatives]
    channels = {w.shape[1] for w in pos + neg}
    if len(channels) != 1:
        raise ValueError(f"channel mismatch among training windows: {sorted(channels)}")
    if config.distance.kind == "euclidean_flat" or config.variant == ORIGINAL:
        shapes = {w.shape for w in pos + neg}
        if len(shapes) != 1:
            raise ValueError(f"training windows must share one shape, got {sorted(shapes)}")
    state, trace = _Trainer(pos, neg, config).run()
    templates = [Template(center=np.array(c, dtype=np.float64), radius=float(r))
                 for c, r in zip(state.centers, state.radii)]
    model = MccModel(templates, config.distance, tuple(pos[0].shape), fingerprint)
    return model, trace


def coverage_matrix(model: MccModel, windows: Sequence, threshold_scale: float = 1.0) -> np.ndarray:
    """Boolean ``(n_windows, K)`` matrix: window inside template ball (model order)."""
    d = pairwise(windows, [t.center for t in model.templates], model.distance)
    radii = np.array([t.radius for t in model.templates])
    return d <= threshold_scale * radii[None, :]


def rank_templates(model: MccModel, positives: Sequence) -> MccModel:
    """Greedy max-marginal-coverage ranking.

    Repeatedly picks the template covering the most not-yet-covered
    positives. Returns a new model whose templates are sorted by rank and
    carry their marginal ``coverage_count``.
    """
    _require(positives, "positives")
    cov = coverage_matrix(model, positives)
    uncovered = np.ones(cov.shape[0], dtype=bool)
    remaining = list(range(model.k))
    ranked = []
    for r in range(1, model.k + 1):
        gains = [int(np.sum(cov[:, j] & uncovered)) for j in remaining]
        pick = remaining.pop(int(np.argmax(gains)))
        gain = max(gains)
        uncovered &= ~cov[:, pick]
        ranked.append(replace(model.templates[pick], rank=r, coverage_count=gain))
    return replace(model, templates=ranked)


# ---------------------------------------------------------------------------
# inference


@dataclass(frozen=True)
class Prediction:
    label: bool
    best_template: Optional[int]
    score: float


def _check_inputs(model: MccModel, windows: List[np.ndarray], top_k: Optional[int]):
    k = model.k if top_k is None else top_k
    if not 1 <= k <= model.k:
        raise ValueError(f"top_k must lie in 1..{model.k}, got {top_k}")
    length, channels = model.window_shape
    for w in windows:
        if w.shape[1] != channels:
            raise ValueError(f"channel mismatch: model expects {channels}, got {w.shape[1]}")
        if model.distance.kind == "euclidean_flat" and w.shape[0] != length:
            raise ValueError(f"window shape {w.shape} contradicts model shape {model.window_shape}")
    return k


def template_distances(model: MccModel, windows: Sequence) -> np.ndarray:
    """Distances ``(n_windows, K)`` to templates in rank order."""
    windows = [as_window(w) for w in windows]
    _check_inputs(model, windows, None)
    return pairwise(windows, [t.center for t in model.ordered()], model.distance)


def scores_from_distances(dist: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Distance-to-radius ratios; zero radius scores 0 on exact hit, sentinel otherwise."""
    out = np.full(dist.shape, SCORE_SENTINEL)
    pos = radii > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:, pos] = dist[:, pos] / radii[pos]
    out[:, ~pos] = np.where(dist[:, ~pos] == 0, 0.0, SCORE_SENTINEL)
    return out


def predict_from_distances(dist: np.ndarray, radii: np.ndarray, top_k: int,
                           threshold_scale: float = 1.0) -> np.ndarray:
    """Labels for precomputed rank-ordered distances."""
    return np.any(dist[:, :top_k] <= threshold_scale * radii[None, :top_k], axis=1)


def predict_many(model: MccModel, windows: Sequence, top_k: Optional[int] = None,
                 threshold_scale: float = 1.0) -> np.ndarray:
    """Vectorised labels for many windows."""
    if threshold_scale <= 0:
        raise ValueError("threshold_scale must be positive")
    windows = [as_window(w) for w in windows]
    k = _check_inputs(model, windows, top_k)
    if not windows:
        return np.zeros(0, dtype=bool)
    tmpl = model.ordered()[:k]
    dist = pairwise(windows, [t.center for t in tmpl], model.distance)
    radii = np.array([t.radius for t in tmpl])
    return predict_from_distances(dist, radii, k, threshold_scale)


def predict(model: MccModel, sample, top_k: Optional[int] = None,
            threshold_scale: float = 1.0) -> Prediction:
    """Classify one window against the ``top_k`` highest-ranked templates.

    Positive iff some template has ``dist <= threshold_scale * radius``. The
    score is the smallest distance-to-radius ratio; ``best_template`` is the
    rank-order position achieving it.
    """
    if threshold_scale <= 0:
        raise ValueError("threshold_scale must be positive")
    w = as_window(sample)
    k = _check_inputs(model, [w], top_k)
    tmpl = model.ordered()[:k]
    dist = pairwise([w], [t.center for t in tmpl], model.distance)
    radii = np.array([t.radius for t in tmpl])
    scores = scores_from_distances(dist, radii)[0]
    best = int(np.argmin(scores))
    label = bool(predict_from_distances(dist, radii, k, threshold_scale)[0])
    return Prediction(label=label, best_template=best, score=float(scores[best]))


def margin_threshold_scale(model: MccModel, negatives: Sequence,
                           top_k: Optional[int] = None) -> float:
    """Radius multiplier halfway to the first training negative.

    Uses only training data: the smallest distance-to-radius ratio among the
    negatives bounds how far the balls can grow before admitting one. Returns
    1.0 when a negative is already covered or no negatives are given.
    """
    if len(negatives) == 0:
        return 1.0
    tmpl = model.ordered()[: model.k if top_k is None else top_k]
    radii = np.array([t.radius for t in tmpl])
    dist = pairwise(negatives, [t.center for t in tmpl], model.distance)
    nearest = float(scores_from_distances(dist, radii).min())
    if nearest <= 1.0 or nearest == SCORE_SENTINEL:
        return 1.0
    return 0.5 * (1.0 + nearest)
