import math
from dataclasses import replace

import numpy as np
import pytest

from vamp.errors import AllZero, AlphaOutOfRange, InconsistentTracks, InvalidWeights
from vamp.media import VideoClip
from vamp.pipeline import SamplingConfig, evaluate
from vamp.regions import ObjectTrack, RegionMask
from vamp.scoring import (PairRecord, ScoreBreakdown, ScoreConfig, flat_weights_to_config, preset,
                          rescore, score_clip, sensitivity_sweep)
from vamp.synthetic import uniform_clip


def _static_clip(n=6, seed=0):
    f = np.random.default_rng(seed).integers(0, 256, size=(40, 50, 3), dtype=np.uint8)
    return VideoClip(np.repeat(f[None], n, axis=0))


def test_flat_weights_sift_tuple():
    cfg = flat_weights_to_config((0.3, 0.05, 0.05, 0.6))
    assert abs(cfg.alpha - 0.4) < 1e-12 and abs(cfg.beta - 0.6) < 1e-12
    w = cfg.appearance_weights
    assert (w.color, w.shape, w.texture) == pytest.approx((0.75, 0.125, 0.125), abs=1e-12)


def test_flat_weights_sam_tuple_renormalised():
    cfg = flat_weights_to_config((0.069, 0.138, 0.092, 0.7))
    assert cfg.beta == pytest.approx(0.7 / 0.999, abs=1e-12)
    assert cfg.alpha == pytest.approx(0.2993, abs=1e-4)
    w = cfg.appearance_weights
    assert (w.color, w.shape, w.texture) == pytest.approx((0.2308, 0.4615, 0.3077), abs=1e-4)


def test_flat_weights_motion_only_and_errors():
    cfg = flat_weights_to_config((0, 0, 0, 1))
    assert cfg.alpha == 0 and cfg.beta == 1
    assert cfg.appearance_weights.color == pytest.approx(1 / 3)
    with pytest.raises(AllZero):
        flat_weights_to_config((0, 0, 0, 0))
    with pytest.raises(InvalidWeights):
        flat_weights_to_config((0.5, -0.1, 0.3, 0.3))


def test_presets():
    assert preset("sift-default").alpha == pytest.approx(0.4)
    assert preset("sam-default").preset_name == "sam-default"
    with pytest.raises(ValueError):
        preset("nope")


def test_config_alpha_beta_validated():
    with pytest.raises(InvalidWeights):
        ScoreConfig(alpha=0.7, beta=0.7)


def test_identical_frames_score_one():
    clip = _static_clip()
    tracks = [ObjectTrack(1, 0, [RegionMask.rectangle(0, 0, 49, 39)] * 6)]
    b = score_clip(clip, tracks, preset("sift-default"))
    assert b.vamp == 1.0 and b.vamp_a == 1.0 and b.vamp_m == 1.0
    assert b.n_pairs == 5 and b.n_objects == 1 and not b.segmentation_failed


def test_no_tracks_is_segmentation_failure():
    b = score_clip(_static_clip(), [])
    assert b.vamp == 0.0 and b.segmentation_failed
    assert b.at_alpha(0.3) == 0.0


def test_single_frame_tracks_are_dropped():
    clip = _static_clip()
    b = score_clip(clip, [ObjectTrack(1, 2, [RegionMask.rectangle(0, 0, 5, 5)])])
    assert b.segmentation_failed


def test_inconsistent_tracks():
    clip = _static_clip(n=3)
    with pytest.raises(InconsistentTracks):
        score_clip(clip, [ObjectTrack(1, 2, [RegionMask.rectangle(0, 0, 5, 5)] * 2)])
    with pytest.raises(InconsistentTracks):
        score_clip(clip, [ObjectTrack(1, 0, [RegionMask.rectangle(0, 0, 60, 5)] * 2)])


def _moving_tracks():
    """Object 1 drifts right for five frames; object 2 is present only in frames 2-3."""
    a = [RegionMask.rectangle(2 + t, 5, 12 + t, 15) for t in range(5)]
    b = [RegionMask.rectangle(30, 20, 40, 30)] * 2
    return [ObjectTrack(1, 0, a), ObjectTrack(2, 2, b)]


def test_mean_over_present_pairs():
    clip = _static_clip(n=5, seed=1)
    b = score_clip(clip, _moving_tracks(), preset("sift-default"))
    assert b.n_pairs == 4 + 1
    ps = [r.pair_score for r in b.records]
    assert b.vamp == pytest.approx(sum(ps) / len(ps), abs=1e-12)
    assert b.vamp == pytest.approx(b.config.alpha * b.vamp_a + b.config.beta * b.vamp_m, abs=1e-9)
    assert all(math.isfinite(x) for r in b.records for x in (r.color, r.shape, r.texture, r.motion))


def test_mean_arithmetic_example():
    recs = [PairRecord(1, 0, t, 1, 1, 1, 1, 1, 1, 1, s) for t, s in enumerate([1.0, 1.0])]
    recs.append(PairRecord(2, 0, 0, 1, 1, 1, 1, 1, 1, 1, 0.5))
    assert math.fsum(r.pair_score for r in recs) / 3 == pytest.approx(0.8333, abs=1e-4)


def test_object_id_permutation_invariant():
    clip = _static_clip(n=5, seed=2)
    tracks = _moving_tracks()
    swapped = [replace(tracks[0], object_id=9), replace(tracks[1], object_id=1)]
    a = score_clip(clip, tracks)
    b = score_clip(clip, swapped)
    assert (a.vamp_a, a.vamp_m, a.vamp) == (b.vamp_a, b.vamp_m, b.vamp)


def test_thread_count_does_not_change_scores():
    clip = _static_clip(n=5, seed=3)
    a = score_clip(clip, _moving_tracks(), workers=1)
    b = score_clip(clip, _moving_tracks(), workers=4)
    assert a.records == b.records and a.vamp == b.vamp


def test_rescore_matches_fresh_scoring():
    clip = _static_clip(n=5, seed=4)
    base = score_clip(clip, _moving_tracks(), preset("sift-default"))
    cfg = preset("sam-default")
    fresh = score_clip(clip, _moving_tracks(), cfg)
    again = rescore(base, cfg)
    assert again.vamp == pytest.approx(fresh.vamp, abs=1e-12)


def test_sweep_examples():
    b = ScoreBreakdown(vamp_a=0.8, vamp_m=0.6)
    assert sensitivity_sweep(b, [0.5]) == [(0.5, pytest.approx(0.7))]
    assert sensitivity_sweep(b, [1, 0]) == [(0.0, 0.6), (1.0, 0.8)]
    with pytest.raises(AlphaOutOfRange):
        sensitivity_sweep(b, [1.5])


def test_sweep_collinear_on_real_clip(standard_clip):
    clip, _ = standard_clip
    b, _, _ = evaluate(clip, preset("sift-default"), SamplingConfig(sampler="grid"))
    (a0, v0), (a1, v1), (a2, v2) = sensitivity_sweep(b, [0, 0.3, 1])
    assert abs((v1 - v0) * (a2 - a0) - (v2 - v0) * (a1 - a0)) < 1e-12


def test_uniform_clip_sift_is_failure():
    b, tracks, info = evaluate(uniform_clip(), preset("sift-default"))
    assert tracks == [] and b.segmentation_failed and b.vamp == 0.0
    assert info["keypoints"] == 0


def test_breakdown_serialises():
    b = score_clip(_static_clip(n=3), [ObjectTrack(1, 0, [RegionMask.rectangle(1, 1, 9, 9)] * 3)])
    d = b.to_dict()
    assert d["aggregates"]["vamp"] == 1.0 and len(d["records"]) == 2
