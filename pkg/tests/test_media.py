import os

import numpy as np
import pytest
from PIL import Image

from vamp.errors import (DecodeFailure, DimensionMismatch, MissingDirectory, TooFewFrames,
                         WriteFailure, ZeroTargetDimension)
from vamp.media import (VideoClip, load_frames, resize, resize_nearest, save_frames,
                        to_grayscale)


def _write(path, arr):
    Image.fromarray(arr.astype(np.uint8)).save(path)


def test_load_orders_frames_by_filename(tmp_path, rng):
    frames = rng.integers(0, 256, size=(32, 240, 320, 3), dtype=np.uint8)
    for i in reversed(range(32)):
        _write(tmp_path / f"frame_{i:03d}.png", frames[i])
    clip = load_frames(tmp_path)
    assert len(clip) == 32 and (clip.width, clip.height) == (320, 240)
    np.testing.assert_array_equal(clip.frames, frames)


def test_single_frame_is_too_few(tmp_path):
    _write(tmp_path / "a.png", np.zeros((4, 4, 3)))
    with pytest.raises(TooFewFrames):
        load_frames(tmp_path)


def test_mixed_dimensions_rejected(tmp_path):
    _write(tmp_path / "a.png", np.zeros((240, 320, 3)))
    _write(tmp_path / "b.png", np.zeros((480, 640, 3)))
    with pytest.raises(DimensionMismatch):
        load_frames(tmp_path)


def test_missing_directory(tmp_path):
    with pytest.raises(MissingDirectory):
        load_frames(tmp_path / "nope")


def test_undecodable_file(tmp_path):
    _write(tmp_path / "a.png", np.zeros((4, 4, 3)))
    (tmp_path / "b.png").write_bytes(b"not a png")
    with pytest.raises(DecodeFailure):
        load_frames(tmp_path)


def test_grayscale_input_promoted_to_rgb(tmp_path):
    for i in range(2):
        Image.fromarray(np.full((5, 6), 77, np.uint8), mode="L").save(tmp_path / f"{i}.png")
    clip = load_frames(tmp_path)
    assert clip.frames.shape == (2, 5, 6, 3) and (clip.frames == 77).all()


def test_save_load_round_trip(tmp_path, rng):
    clip = VideoClip(rng.integers(0, 256, size=(32, 24, 32, 3), dtype=np.uint8))
    out = tmp_path / "new" / "dir"
    assert save_frames(clip, out) == 32
    assert len(os.listdir(out)) == 32
    np.testing.assert_array_equal(load_frames(out).frames, clip.frames)


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_read_only_directory(tmp_path):
    d = tmp_path / "ro"
    d.mkdir()
    d.chmod(0o500)
    try:
        with pytest.raises(WriteFailure):
            save_frames(VideoClip(np.zeros((2, 4, 4, 3), np.uint8)), d)
    finally:
        d.chmod(0o700)


def test_write_failure_when_target_is_a_file(tmp_path):
    target = tmp_path / "file"
    target.write_text("x")
    with pytest.raises(WriteFailure):
        save_frames(VideoClip(np.zeros((2, 4, 4, 3), np.uint8)), target)


def test_clip_invariants():
    with pytest.raises(TooFewFrames):
        VideoClip(np.zeros((1, 4, 4, 3), np.uint8))
    clip = VideoClip(np.zeros((2, 3, 4, 3), np.uint8))
    assert clip.diagonal == pytest.approx(5.0)


@pytest.mark.parametrize("rgb", [(255, 255, 255), (255, 0, 0), (10, 20, 30), (0, 0, 0), (1, 2, 3)])
def test_grayscale_matches_luma_formula(rgb):
    frame = np.empty((2, 2, 3), np.uint8)
    frame[...] = rgb
    expected = int(np.floor(0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2] + 0.5))
    assert (to_grayscale(frame) == expected).all()


def test_grayscale_known_values():
    assert to_grayscale(np.array([[[255, 0, 0]]], np.uint8))[0, 0] == 76
    assert to_grayscale(np.array([[[10, 20, 30]]], np.uint8))[0, 0] == 18


def test_grayscale_preserves_gray_levels():
    v = np.arange(256, dtype=np.uint8)
    frame = np.stack([v, v, v], axis=-1)[None]
    np.testing.assert_array_equal(to_grayscale(frame)[0], v)


def test_resize_constant_and_identity(rng):
    const = np.full((64, 64), 93, np.uint8)
    assert (resize(const, 32, 32) == 93).all()
    assert (resize(const, 7, 101) == 93).all()
    img = rng.integers(0, 256, size=(10, 13, 3), dtype=np.uint8)
    out = resize(img, 13, 10)
    np.testing.assert_array_equal(out, img)
    assert out is not img


def test_resize_ramp_is_monotone():
    out = resize(np.array([[0, 255]], np.uint8), 4, 1)
    assert out.shape == (1, 4)
    assert out[0, 0] == 0 and out[0, -1] == 255
    assert (np.diff(out[0].astype(int)) >= 0).all()
    # half-pixel centres: 0, 0.25, 0.75, 1 of the way
    np.testing.assert_array_equal(out[0], [0, 64, 191, 255])


def test_resize_rejects_zero_dims():
    with pytest.raises(ZeroTargetDimension):
        resize(np.zeros((4, 4), np.uint8), 0, 4)
    with pytest.raises(ZeroTargetDimension):
        resize_nearest(np.zeros((4, 4), np.uint8), 4, 0)
