import json

import numpy as np
import pytest

from vamp.corruption import (KINDS, SEVERITY, CorruptionSpec, black_boxes, corrupt_black_shapes,
                             corrupt_brightness, corrupt_clip, corrupt_defocus, corrupt_gaussian,
                             corrupt_impulse, disk_kernel, replay)
from vamp.errors import BadLevel, ConfigError
from vamp.media import VideoClip
from vamp.pipeline import evaluate
from vamp.sampling import make_rng
from vamp.scoring import preset


def gray(v, h=240, w=320):
    return np.full((h, w, 3), v, np.uint8)


def small_clip(seed=0, n=4):
    return VideoClip(np.random.default_rng(seed).integers(0, 256, (n, 30, 40, 3), dtype=np.uint8))


def test_severity_tables_strictly_increasing():
    for table in SEVERITY.values():
        for vals in table.values():
            assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("kind", KINDS)
def test_level_zero_is_identity(kind):
    clip = small_clip()
    out, rec = corrupt_clip(clip, CorruptionSpec(kind, 0, 3))
    np.testing.assert_array_equal(out.frames, clip.frames)
    assert rec["level"] == 0


@pytest.mark.parametrize("bad", [-1, 6, 2.5])
def test_bad_levels(bad):
    with pytest.raises(BadLevel):
        CorruptionSpec("brightness", bad)
    with pytest.raises(BadLevel):
        corrupt_brightness(gray(0), 0)


def test_unknown_kind():
    with pytest.raises(ConfigError):
        CorruptionSpec("fog", 1)


def test_brightness():
    assert (corrupt_brightness(gray(128), 1) == 154).all()
    assert (corrupt_brightness(gray(250), 5) == 255).all()
    assert (corrupt_brightness(gray(200), 5) >= 200).all()


def test_gaussian_statistics_and_determinism():
    out = corrupt_gaussian(gray(128), 3, seed=5)
    assert abs(out.mean() - 128) < 1 and abs(out.std() - 26) < 2
    np.testing.assert_array_equal(out, corrupt_gaussian(gray(128), 3, seed=5))
    stds = [corrupt_gaussian(gray(128), lv, seed=5).std() for lv in range(1, 6)]
    assert all(b > a for a, b in zip(stds, stds[1:]))


def test_gaussian_frames_get_independent_noise():
    a = corrupt_gaussian(gray(128), 2, seed=5, frame_index=0)
    b = corrupt_gaussian(gray(128), 2, seed=5, frame_index=1)
    assert not np.array_equal(a, b)


def test_impulse_fraction():
    out = corrupt_impulse(gray(128), 1, seed=2)
    hit = (out != 128).all(axis=-1)
    assert ((out == 0) | (out == 255) | (out == 128)).all()
    n = hit.size
    p = 0.02
    assert abs(hit.sum() - n * p) < 3 * np.sqrt(n * p * (1 - p))
    np.testing.assert_array_equal(out, corrupt_impulse(gray(128), 1, seed=2))
    f5 = (corrupt_impulse(gray(128), 5, seed=2) != 128).all(-1).mean()
    assert f5 > hit.mean()


def test_defocus():
    for lv in range(1, 6):
        np.testing.assert_array_equal(corrupt_defocus(gray(77, 40, 40), lv), gray(77, 40, 40))
        assert abs(disk_kernel(SEVERITY["defocus_blur"]["radius"][lv - 1]).sum() - 1) < 1e-9
    dot = np.zeros((41, 41, 3), np.uint8)
    dot[20, 20] = 255
    out = corrupt_defocus(dot, 1).astype(int)
    assert (out[..., 0] > 0).sum() == (disk_kernel(2) > 0).sum()
    assert abs(out[..., 0].sum() - 255) <= (disk_kernel(2) > 0).sum() / 2
    step = np.zeros((20, 60, 3), np.uint8)
    step[:, 30:] = 255
    sharp = [np.abs(np.diff(corrupt_defocus(step, lv)[10, :, 0].astype(int))).max() for lv in range(1, 6)]
    assert all(b < a for a, b in zip(sharp, sharp[1:]))


def test_black_shapes_static_and_nested():
    clip = VideoClip(np.full((3, 100, 120, 3), 200, np.uint8))
    covered = []
    for lv in range(1, 6):
        out = corrupt_black_shapes(clip, lv, seed=4)
        black = (out.frames == 0).all(-1)
        assert (black == black[0]).all()
        covered.append(black[0])
    fractions = [c.mean() for c in covered]
    assert all(b >= a for a, b in zip(fractions, fractions[1:]))
    for lo, hi in zip(covered, covered[1:]):
        assert not (lo & ~hi).any()
    boxes = black_boxes(120, 100, 5, make_rng(4))
    for x0, y0, x1, y1 in boxes:
        assert 0.02 * 12000 * 0.8 <= (x1 - x0) * (y1 - y0) <= 0.05 * 12000 * 1.2
    box = black_boxes(120, 100, 1, make_rng(4))[0]
    level1 = (corrupt_black_shapes(clip, 1, 4).frames[0] == 0).all(-1)
    assert level1.sum() == (box[2] - box[0]) * (box[3] - box[1])


def test_black_shapes_per_frame_option():
    clip = VideoClip(np.full((3, 100, 120, 3), 200, np.uint8))
    out = corrupt_black_shapes(clip, 2, seed=4, per_frame=True)
    black = (out.frames == 0).all(-1)
    assert not (black == black[0]).all()


@pytest.mark.parametrize("kind", KINDS)
def test_replay_and_thread_independence(kind):
    clip = small_clip(1)
    out, rec = corrupt_clip(clip, CorruptionSpec(kind, 3, 11))
    rec = json.loads(json.dumps(rec))
    np.testing.assert_array_equal(replay(clip, rec), out.frames)
    par, _ = corrupt_clip(clip, CorruptionSpec(kind, 3, 11), workers=4)
    np.testing.assert_array_equal(par.frames, out.frames)
    assert rec["params"]


def test_gaussian_level_three_scores_below_level_one(standard_clip):
    clip, _ = standard_clip
    cfg = preset("sift-default")
    v1 = evaluate(corrupt_clip(clip, CorruptionSpec("gaussian_noise", 1))[0], cfg)[0].vamp
    v3 = evaluate(corrupt_clip(clip, CorruptionSpec("gaussian_noise", 3))[0], cfg)[0].vamp
    assert v3 < v1
