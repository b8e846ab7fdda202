"""Frame sequences on disk and the pixel primitives used downstream.

Frames are ``numpy.uint8`` arrays of shape ``(height, width, 3)``; gray
frames are ``(height, width)``.  A clip is a directory of lossless stills
(PNG or binary PPM/PGM) whose lexicographic filename order is the
temporal order.
"""
from __future__ import annotations

import glob
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DecodeFailure,
    DimensionMismatch,
    MissingDirectory,
    TooFewFrames,
    WriteFailure,
    ZeroTargetDimension,
)

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass
class VideoClip:
    """Ordered same-size RGB frames.

    ``frames`` is stacked into a ``(n, h, w, 3)`` uint8 array on
    construction so every downstream module can index it directly.
    """

    frames: np.ndarray
    fps: float = 30.0
    source: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.frames, np.ndarray):
            frames = list(self.frames)
            if len(frames) < 2:
                raise TooFewFrames(f"a clip needs at least 2 frames, got {len(frames)}")
            shape = frames[0].shape
            for i, f in enumerate(frames):
                if f.shape != shape:
                    raise DimensionMismatch(
                        f"frame {i} has shape {f.shape}, expected {shape}")
            self.frames = np.stack(frames)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise DimensionMismatch(
                f"expected (n, h, w, 3) frames, got {self.frames.shape}")
        if len(self.frames) < 2:
            raise TooFewFrames(f"a clip needs at least 2 frames, got {len(self.frames)}")
        if self.frames.dtype != np.uint8:
            self.frames = np.clip(np.rint(self.frames), 0, 255).astype(np.uint8)

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.frames[i]

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width, self.height))


def _decode(path: str) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeFailure(f"cannot decode {path}: {exc}") from exc


def list_frame_files(dir_path: str | os.PathLike, pattern: str = "*.png") -> list[str]:
    """Files in ``dir_path`` matching ``pattern``, sorted lexicographically."""
    dir_path = os.fspath(dir_path)
    if not os.path.isdir(dir_path):
        raise MissingDirectory(f"no such directory: {dir_path}")
    files = [p for p in glob.glob(os.path.join(glob.escape(dir_path), pattern))
             if os.path.isfile(p)]
    return sorted(files, key=os.path.basename)


def load_frames(dir_path: str | os.PathLike, pattern: str = "*.png",
                fps: float = 30.0, workers: int = 1) -> VideoClip:
    """Decode every file matching ``pattern`` into an 8-bit RGB clip.

    Raises MissingDirectory, TooFewFrames, DimensionMismatch or
    DecodeFailure.
    """
    files = list_frame_files(dir_path, pattern)
    if len(files) < 2:
        raise TooFewFrames(
            f"{dir_path}: {len(files)} file(s) match {pattern!r}, need at least 2")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            frames = list(pool.map(_decode, files))
    else:
        frames = [_decode(f) for f in files]
    shape = frames[0].shape
    for f, arr in zip(files, frames):
        if arr.shape != shape:
            raise DimensionMismatch(
                f"{f} is {arr.shape[1]}x{arr.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}")
    return VideoClip(np.stack(frames), fps=fps, source=os.fspath(dir_path))


def save_frames(clip: VideoClip, dir_path: str | os.PathLike,
                prefix: str = "frame_", digits: int = 5) -> int:
    """Write ``clip`` as zero-padded PNG files; returns the file count."""
    dir_path = Path(dir_path)
    digits = max(digits, len(str(len(clip) - 1)))
    try:
        dir_path.mkdir(parents=True, exist_ok=True)
        for i, frame in enumerate(clip.frames):
            Image.fromarray(frame, mode="RGB").save(
                dir_path / f"{prefix}{i:0{digits}d}.png", format="PNG")
    except OSError as exc:
        raise WriteFailure(f"cannot write frames to {dir_path}: {exc}") from exc
    return len(clip)


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half-up and clamped to uint8."""
    if frame.ndim == 2:
        return frame.astype(np.uint8, copy=True)
    rgb = frame.astype(np.float64)
    r, g, b = LUMA_WEIGHTS
    luma = r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def _axis_weights(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # half-pixel centres, edge clamped
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def resize(image: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Bilinear resize of a gray ``(h, w)`` or colour ``(h, w, c)`` image.

    Integer inputs are rounded back to their dtype; a resize to the same
    dimensions returns an exact copy.
    """
    if target_w < 1 or target_h < 1:
        raise ZeroTargetDimension(f"target size {target_w}x{target_h} must be >= 1x1")
    h, w = image.shape[:2]
    if (h, w) == (target_h, target_w):
        return image.copy()
    y0, y1, fy = _axis_weights(h, target_h)
    x0, x1, fx = _axis_weights(w, target_w)
    img = image.astype(np.float64)
    if img.ndim == 3:
        fx = fx[None, :, None]
        fy = fy[:, None, None]
    else:
        fx = fx[None, :]
        fy = fy[:, None]
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bottom = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    out = top * (1 - fy) + bottom * fy
    if np.issubdtype(image.dtype, np.integer):
        info = np.iinfo(image.dtype)
        return np.clip(np.rint(out), info.min, info.max).astype(image.dtype)
    return out.astype(image.dtype, copy=False)


def resize_nearest(image: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Nearest-neighbour resize, used for boolean masks."""
    if target_w < 1 or target_h < 1:
        raise ZeroTargetDimension(f"target size {target_w}x{target_h} must be >= 1x1")
    h, w = image.shape[:2]
    ys = np.minimum(((np.arange(target_h) + 0.5) * h / target_h).astype(np.intp), h - 1)
    xs = np.minimum(((np.arange(target_w) + 0.5) * w / target_w).astype(np.intp), w - 1)
    return image[ys][:, xs]


def write_gray_png(array: np.ndarray, path: str | os.PathLike) -> None:
    try:
        Image.fromarray(np.asarray(array, dtype=np.uint8), mode="L").save(path, format="PNG")
    except OSError as exc:
        raise WriteFailure(f"cannot write {path}: {exc}") from exc


def read_gray(path: str | os.PathLike) -> np.ndarray:
    """Read a single-channel 8-bit image without any colour conversion."""
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "P", "I", "I;16"):
                im = im.convert("L")
            return np.asarray(im).astype(np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeFailure(f"cannot decode {path}: {exc}") from exc


def clip_from_frames(frames: Sequence[np.ndarray], fps: float = 30.0) -> VideoClip:
    return VideoClip(np.stack([np.asarray(f, dtype=np.uint8) for f in frames]), fps=fps)
