"""Combine appearance and motion sub-scores into the clip-level VAMP score."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .appearance import SHAPE_MODES, AppearanceWeights, appearance_components
from .errors import AllZero, AlphaOutOfRange, ConfigError, InconsistentTracks, InvalidWeights
from .media import VideoClip
from .motion import NORMALIZATIONS, MotionWeights, Trajectory, motion_components
from .regions import ObjectTrack, extract_patch

SCHEMA_VERSION = 1

PRESET_TUPLES = {
    "sift-default": (0.3, 0.05, 0.05, 0.6),
    "sam-default": (0.069, 0.138, 0.092, 0.7),
}


@dataclass(frozen=True)
class ScoreConfig:
    appearance_weights: AppearanceWeights = AppearanceWeights()
    motion_weights: MotionWeights = MotionWeights()
    alpha: float = 0.5
    beta: float = 0.5
    shape_mode: str = "single_wrap"
    motion_normalization: str = "frame_diagonal"
    center_contours: bool = True
    preset_name: str | None = None

    def __post_init__(self):
        if not (self.alpha >= 0 and self.beta >= 0) or abs(self.alpha + self.beta - 1) > 1e-9:
            raise InvalidWeights(f"alpha and beta must be >= 0 and sum to 1: {self.alpha}, {self.beta}")
        if self.shape_mode not in SHAPE_MODES:
            raise ConfigError(f"shape mode must be one of {SHAPE_MODES}")
        if self.motion_normalization not in NORMALIZATIONS:
            raise ConfigError(f"motion normalization must be one of {NORMALIZATIONS}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["appearance_weights"] = asdict(self.appearance_weights)
        d["motion_weights"] = asdict(self.motion_weights)
        return d


def flat_weights_to_config(weights, **overrides) -> ScoreConfig:
    """Build a config from a (color, shape, texture, motion) tuple.

    The motion share of the total becomes beta; the appearance entries are
    renormalised among themselves.  Tuples that do not sum to 1 are
    rescaled.
    """
    ws = [float(w) for w in weights]
    if len(ws) != 4:
        raise ConfigError(f"expected 4 weights (color, shape, texture, motion), got {len(ws)}")
    if any(not math.isfinite(w) or w < 0 for w in ws):
        raise InvalidWeights(f"weights must be finite and >= 0: {ws}")
    total = math.fsum(ws)
    if total <= 0:
        raise AllZero("at least one weight must be positive")
    beta = ws[3] / total
    alpha = 1.0 - beta
    app = math.fsum(ws[:3])
    if app > 0:
        c, s = ws[0] / app, ws[1] / app
        aw = AppearanceWeights(c, s, 1.0 - c - s)
    else:
        aw = AppearanceWeights()
    return ScoreConfig(appearance_weights=aw, alpha=alpha, beta=beta, **overrides)


def preset(name: str, **overrides) -> ScoreConfig:
    if name not in PRESET_TUPLES:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESET_TUPLES)}")
    return flat_weights_to_config(PRESET_TUPLES[name], preset_name=name, **overrides)


@dataclass(frozen=True)
class PairRecord:
    object_id: int
    segment: int
    t: int
    color: float
    shape: float
    texture: float
    appearance: float
    velocity: float
    acceleration: float
    motion: float
    pair_score: float


@dataclass
class ScoreBreakdown:
    records: list[PairRecord] = field(default_factory=list)
    vamp_a: float = 0.0
    vamp_m: float = 0.0
    vamp: float = 0.0
    n_objects: int = 0
    n_pairs: int = 0
    segmentation_failed: bool = False
    partial_motion: bool = False
    config: ScoreConfig | None = None

    def at_alpha(self, alpha: float) -> float:
        """VAMP recombined with a different appearance weight."""
        if not 0.0 <= alpha <= 1.0:
            raise AlphaOutOfRange(f"alpha {alpha} outside [0, 1]")
        if self.segmentation_failed:
            return 0.0
        return alpha * self.vamp_a + (1.0 - alpha) * self.vamp_m

    def to_dict(self) -> dict:
        return {
            "aggregates": {"vamp_a": self.vamp_a, "vamp_m": self.vamp_m, "vamp": self.vamp},
            "counts": {"objects": self.n_objects, "pairs": self.n_pairs},
            "flags": {"segmentation_failed": self.segmentation_failed,
                      "partial_motion": self.partial_motion},
            "records": [asdict(r) for r in self.records],
        }


def _check_tracks(clip: VideoClip, tracks: list[ObjectTrack]) -> None:
    for tr in tracks:
        if tr.start < 0 or tr.end >= len(clip):
            raise InconsistentTracks(
                f"track {tr.object_id} covers frames {tr.start}..{tr.end}, clip has {len(clip)}")
        for m in tr.masks:
            if not m.inside(clip.width, clip.height):
                raise InconsistentTracks(f"track {tr.object_id} mask {m.bbox} leaves the frame")


def score_clip(clip: VideoClip, tracks: list[ObjectTrack], cfg: ScoreConfig | None = None,
               workers: int = 1) -> ScoreBreakdown:
    """Mean of ``alpha * appearance + beta * motion`` over every present
    (object, consecutive-frame pair).

    Each object's motion score is computed once over its whole trajectory
    and applied to all of its pairs.  With no usable tracks the score is 0
    and ``segmentation_failed`` is set.
    """
    cfg = cfg or ScoreConfig()
    _check_tracks(clip, tracks)
    usable = sorted((tr for tr in tracks if len(tr) >= 2),
                    key=lambda tr: (tr.object_id, tr.segment, tr.start))
    if not usable:
        return ScoreBreakdown(segmentation_failed=True, config=cfg)

    motions = {}
    for tr in usable:
        traj = Trajectory(tr.centroids(), cfg.motion_normalization, (clip.width, clip.height))
        motions[id(tr)] = motion_components(traj, cfg.motion_weights)

    jobs = [(tr, t) for tr in usable for t in range(tr.start, tr.end)]

    def run(job):
        tr, t = job
        p = extract_patch(clip[t], tr.mask_at(t), t)
        q = extract_patch(clip[t + 1], tr.mask_at(t + 1), t + 1)
        return appearance_components(p, q, cfg.shape_mode, cfg.center_contours)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            comps = list(pool.map(run, jobs))
    else:
        comps = [run(j) for j in jobs]

    records = []
    for (tr, t), (c, s, x) in zip(jobs, comps):
        m = motions[id(tr)]
        app = cfg.appearance_weights.combine(c, s, x)
        records.append(PairRecord(tr.object_id, tr.segment, t, c, s, x, app,
                                  m.velocity, m.acceleration, m.score,
                                  cfg.alpha * app + cfg.beta * m.score))
    n = len(records)
    return ScoreBreakdown(
        records=records,
        vamp_a=math.fsum(r.appearance for r in records) / n,
        vamp_m=math.fsum(r.motion for r in records) / n,
        vamp=math.fsum(r.pair_score for r in records) / n,
        n_objects=len({tr.object_id for tr in usable}),
        n_pairs=n,
        partial_motion=any(motions[id(tr)].partial for tr in usable),
        config=cfg,
    )


def rescore(breakdown: ScoreBreakdown, cfg: ScoreConfig) -> ScoreBreakdown:
    """Re-aggregate cached colour/shape/texture/velocity/acceleration values under new weights."""
    if breakdown.segmentation_failed:
        return replace(breakdown, config=cfg)
    records = []
    for r in breakdown.records:
        app = cfg.appearance_weights.combine(r.color, r.shape, r.texture)
        mot = cfg.motion_weights.velocity * r.velocity + cfg.motion_weights.acceleration * r.acceleration
        records.append(replace(r, appearance=app, motion=mot,
                               pair_score=cfg.alpha * app + cfg.beta * mot))
    n = len(records)
    return replace(
        breakdown, records=records, config=cfg,
        vamp_a=math.fsum(r.appearance for r in records) / n,
        vamp_m=math.fsum(r.motion for r in records) / n,
        vamp=math.fsum(r.pair_score for r in records) / n,
    )


def sensitivity_sweep(breakdown: ScoreBreakdown, alphas) -> list[tuple[float, float]]:
    """(alpha, VAMP) rows sorted by alpha, reusing the cached sub-scores."""
    alphas = [float(a) for a in alphas]
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise AlphaOutOfRange(f"alpha {a} outside [0, 1]")
    return [(a, breakdown.at_alpha(a)) for a in sorted(alphas)]


def csv_row(clip_id: str, b: ScoreBreakdown) -> list:
    return [clip_id, b.vamp_a, b.vamp_m, b.vamp]


CSV_HEADER = ["clip", "vamp_a", "vamp_m", "vamp"]


def fmt(x: float) -> str:
    return repr(float(x)) if np.isfinite(x) else "nan"
