"""Clip in, tracks and score out."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
from .media import VideoClip
from .regions import ObjectTrack, TrackerParams, load_masks, region_from_seed, track_regions
from .sampling import SAMPLERS, SiftClusterParams, sample_grid, sample_random, sift_cluster_seeds
from .scoring import ScoreBreakdown, ScoreConfig, score_clip


@dataclass(frozen=True)
class SamplingConfig:
    sampler: str = "sift"
    seed: int = 0
    n_random: int = 8
    grid: tuple[int, int] = (1, 1)
    sift: SiftClusterParams = field(default_factory=SiftClusterParams)
    tracker: TrackerParams = field(default_factory=TrackerParams)

    def __post_init__(self):
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = list(self.grid)
        return d


def initial_regions(clip: VideoClip, sc: SamplingConfig) -> tuple[list, dict]:
    """First-frame region masks for the configured sampler."""
    frame = clip[0]
    info: dict = {"sampler": sc.sampler}
    if sc.sampler == "random":
        seeds = sample_random(clip.width, clip.height, sc.n_random, sc.seed)
        members = [None] * len(seeds)
    elif sc.sampler == "grid":
        seeds = sample_grid(clip.width, clip.height, *sc.grid)
        members = [None] * len(seeds)
    else:
        ss = sift_cluster_seeds(frame, sc.sift)
        seeds, members = ss.seeds, ss.members
        info.update(keypoints=ss.keypoints, noise_points=ss.noise)
    info["seeds"] = np.asarray(seeds).tolist()
    masks = [region_from_seed(frame, s, m) for s, m in zip(seeds, members)]
    return masks, info


def find_tracks(clip: VideoClip, sc: SamplingConfig, masks_manifest=None) -> tuple[list[ObjectTrack], dict]:
    if masks_manifest is not None:
        return load_masks(masks_manifest, clip), {"source": "masks", "manifest": str(masks_manifest)}
    masks, info = initial_regions(clip, sc)
    info["source"] = "sampler"
    if not masks:
        return [], info
    return track_regions(clip, masks, sc.tracker), info


def evaluate(clip: VideoClip, cfg: ScoreConfig, sc: SamplingConfig | None = None,
             masks_manifest=None, workers: int = 1) -> tuple[ScoreBreakdown, list[ObjectTrack], dict]:
    sc = sc or SamplingConfig()
    tracks, info = find_tracks(clip, sc, masks_manifest)
    return score_clip(clip, tracks, cfg, workers=workers), tracks, info
