"""Synthetic clips with known motion, used by the tests and the demo CLI."""
from __future__ import annotations

import numpy as np

from .media import VideoClip
from .sampling import make_rng


def gradient_background(width: int, height: int) -> np.ndarray:
    x = np.linspace(0.0, 1.0, width)[None, :]
    y = np.linspace(0.0, 1.0, height)[:, None]
    bg = np.empty((height, width, 3), dtype=np.float64)
    bg[..., 0] = 40 + 150 * x + 0 * y
    bg[..., 1] = 60 + 120 * y + 0 * x
    bg[..., 2] = 150 - 60 * x + 30 * y
    return np.rint(bg).astype(np.uint8)


def block_texture(size: int, tile: int, seed: int) -> np.ndarray:
    """``size`` x ``size`` RGB mosaic of random ``tile``-pixel squares."""
    rng = make_rng(seed, 0x7E47)
    n = -(-size // tile)
    colors = rng.integers(0, 256, size=(n, n, 3), dtype=np.int64).astype(np.uint8)
    tex = np.repeat(np.repeat(colors, tile, axis=0), tile, axis=1)
    return tex[:size, :size]


def moving_square_clip(n_frames: int = 32, width: int = 320, height: int = 240,
                       size: int = 48, speed: float = 2.0, tile: int = 6,
                       start: tuple[int, int] | None = None, seed: int = 0) -> tuple[VideoClip, np.ndarray]:
    """Standard fixture: a textured square sliding right over a gradient.

    Returns the clip and the ``(n_frames, 2)`` ground-truth square centres.
    Motion is in whole pixels so every frame is exact.
    """
    bg = gradient_background(width, height)
    tex = block_texture(size, tile, seed)
    if start is None:
        start = (width // 2 - size // 2, height // 2 - size // 2)
    frames, centres = [], []
    for t in range(n_frames):
        x0 = int(round(start[0] + speed * t))
        y0 = int(start[1])
        f = bg.copy()
        xs0, xs1 = max(x0, 0), min(x0 + size, width)
        if xs1 > xs0:
            f[y0:y0 + size, xs0:xs1] = tex[:, xs0 - x0:xs1 - x0]
        frames.append(f)
        centres.append((x0 + (size - 1) / 2.0, y0 + (size - 1) / 2.0))
    return VideoClip(np.stack(frames)), np.array(centres)


def white_square_clip(n_frames: int = 16, width: int = 100, height: int = 60,
                      size: int = 20, speed: int = 2, start: tuple[int, int] = (10, 20),
                      vanish_at: int | None = None) -> tuple[VideoClip, np.ndarray]:
    """White square moving right on black; optionally gone from ``vanish_at`` on."""
    frames, centres = [], []
    for t in range(n_frames):
        f = np.zeros((height, width, 3), dtype=np.uint8)
        x0, y0 = start[0] + speed * t, start[1]
        if vanish_at is None or t < vanish_at:
            f[y0:y0 + size, x0:x0 + size] = 255
        frames.append(f)
        centres.append((x0 + (size - 1) / 2.0, y0 + (size - 1) / 2.0))
    return VideoClip(np.stack(frames)), np.array(centres)


def uniform_clip(n_frames: int = 8, width: int = 64, height: int = 48,
                 value=(128, 128, 128)) -> VideoClip:
    f = np.empty((height, width, 3), dtype=np.uint8)
    f[...] = value
    return VideoClip(np.repeat(f[None], n_frames, axis=0))
