"""Seeded corruptions at severity levels 1-5 (level 0 is the original clip).

Severity parameters are fixed tables, echoed into every manifest record so
corrupted clips are self-describing.  Random draws come from PCG64 streams
keyed by ``(seed, frame_index)`` so frames can be generated in any order
or in parallel with identical results.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import BadLevel, ConfigError
from .media import VideoClip
from .sampling import make_rng

KINDS = ("brightness", "gaussian_noise", "impulse_noise", "defocus_blur", "black_shapes")

SEVERITY = {
    "brightness": {"shift": (26, 51, 77, 102, 128)},
    "gaussian_noise": {"sigma": (8, 16, 26, 38, 51)},
    "impulse_noise": {"fraction": (0.02, 0.05, 0.10, 0.17, 0.25)},
    "defocus_blur": {"radius": (2, 3, 5, 7, 9)},
    "black_shapes": {"count": (1, 2, 3, 4, 5)},
}
BOX_AREA = (0.02, 0.05)  # each black box covers this fraction of the frame
BOX_ASPECT = (0.5, 2.0)

for _kind, _table in SEVERITY.items():
    for _name, _vals in _table.items():
        if any(b <= a for a, b in zip(_vals, _vals[1:])):
            raise AssertionError(f"severity table {_kind}.{_name} is not strictly increasing")


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    level: int
    seed: int = 0
    per_frame: bool = False  # black_shapes only: redraw boxes every frame

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown corruption kind {self.kind!r}; choose from {KINDS}")
        if not isinstance(self.level, (int, np.integer)) or not 0 <= self.level <= 5:
            raise BadLevel(f"level must be an integer in 0..5, got {self.level!r}")


def _param(kind: str, level: int):
    if not isinstance(level, (int, np.integer)) or not 1 <= level <= 5:
        raise BadLevel(f"level must be an integer in 1..5, got {level!r}")
    (name, values), = SEVERITY[kind].items()
    return values[level - 1]


def level_params(kind: str, level: int) -> dict:
    if level == 0:
        return {}
    (name, _), = SEVERITY[kind].items()
    params = {name: _param(kind, level)}
    if kind == "brightness":
        params["mode"] = "additive"
    if kind == "black_shapes":
        params["box_area"] = list(BOX_AREA)
        params["box_aspect"] = list(BOX_ASPECT)
    return params


def _to_u8(x: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def corrupt_brightness(frame: np.ndarray, level: int) -> np.ndarray:
    shift = _param("brightness", level)
    return np.minimum(frame.astype(np.int16) + shift, 255).astype(np.uint8)


def corrupt_gaussian(frame: np.ndarray, level: int, seed: int, frame_index: int = 0) -> np.ndarray:
    sigma = _param("gaussian_noise", level)
    rng = make_rng(seed, frame_index)
    noise = rng.standard_normal(frame.shape) * sigma
    return _to_u8(frame.astype(np.float64) + noise)


def corrupt_impulse(frame: np.ndarray, level: int, seed: int, frame_index: int = 0) -> np.ndarray:
    p = _param("impulse_noise", level)
    rng = make_rng(seed, frame_index)
    h, w = frame.shape[:2]
    hit = rng.random((h, w)) < p
    salt = rng.random((h, w)) < 0.5
    out = frame.copy()
    out[hit & salt] = 255
    out[hit & ~salt] = 0
    return out


def disk_kernel(radius: int) -> np.ndarray:
    r = int(radius)
    y, x = np.mgrid[-r:r + 1, -r:r + 1]
    k = (x * x + y * y <= r * r).astype(np.float64)
    return k / k.sum()


def corrupt_defocus(frame: np.ndarray, level: int) -> np.ndarray:
    r = _param("defocus_blur", level)
    k = disk_kernel(r)
    padded = np.pad(frame.astype(np.float64), ((r, r), (r, r), (0, 0)), mode="edge")
    out = fftconvolve(padded, k[:, :, None], mode="valid", axes=(0, 1))
    return _to_u8(out)


def black_boxes(width: int, height: int, count: int, rng: np.random.Generator) -> list[tuple[int, int, int, int]]:
    """``count`` rectangles ``(x0, y0, x1, y1)`` (exclusive ends).

    Five boxes are always drawn and the first ``count`` kept, so a higher
    level covers a superset of a lower level's pixels for the same seed.
    """
    area = width * height
    boxes = []
    for _ in range(5):
        frac = rng.uniform(*BOX_AREA)
        aspect = np.exp(rng.uniform(np.log(BOX_ASPECT[0]), np.log(BOX_ASPECT[1])))
        bw = int(np.clip(np.rint(np.sqrt(frac * area * aspect)), 1, width))
        bh = int(np.clip(np.rint(frac * area / bw), 1, height))
        x0 = int(rng.integers(0, width - bw + 1))
        y0 = int(rng.integers(0, height - bh + 1))
        boxes.append((x0, y0, x0 + bw, y0 + bh))
    return boxes[:count]


def _paint(frame: np.ndarray, boxes) -> np.ndarray:
    out = frame.copy()
    for x0, y0, x1, y1 in boxes:
        out[y0:y1, x0:x1] = 0
    return out


def corrupt_black_shapes(clip: VideoClip, level: int, seed: int, per_frame: bool = False,
                         workers: int = 1) -> VideoClip:
    count = _param("black_shapes", level)
    if per_frame:
        boxes = [black_boxes(clip.width, clip.height, count, make_rng(seed, t))
                 for t in range(len(clip))]
    else:
        shared = black_boxes(clip.width, clip.height, count, make_rng(seed))
        boxes = [shared] * len(clip)
    frames = _map(lambda t: _paint(clip[t], boxes[t]), range(len(clip)), workers)
    return VideoClip(np.stack(frames), fps=clip.fps)


def _map(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def corrupt_clip(clip: VideoClip, spec: CorruptionSpec, workers: int = 1) -> tuple[VideoClip, dict]:
    """Apply ``spec`` to every frame; returns the clip and its manifest record."""
    record = {"kind": spec.kind, "level": spec.level, "seed": spec.seed,
              "params": level_params(spec.kind, spec.level)}
    if spec.kind == "black_shapes":
        record["params"]["per_frame"] = spec.per_frame
    if spec.level == 0:
        return VideoClip(clip.frames.copy(), fps=clip.fps), record
    if spec.kind == "black_shapes":
        return corrupt_black_shapes(clip, spec.level, spec.seed, spec.per_frame, workers), record
    ops = {
        "brightness": lambda t: corrupt_brightness(clip[t], spec.level),
        "gaussian_noise": lambda t: corrupt_gaussian(clip[t], spec.level, spec.seed, t),
        "impulse_noise": lambda t: corrupt_impulse(clip[t], spec.level, spec.seed, t),
        "defocus_blur": lambda t: corrupt_defocus(clip[t], spec.level),
    }
    frames = _map(ops[spec.kind], range(len(clip)), workers)
    return VideoClip(np.stack(frames), fps=clip.fps), record


def replay(clip: VideoClip, record: dict, workers: int = 1) -> VideoClip:
    """Re-run a manifest record on its source clip."""
    per_frame = bool(record.get("params", {}).get("per_frame", False))
    spec = CorruptionSpec(record["kind"], int(record["level"]), int(record["seed"]), per_frame)
    return corrupt_clip(clip, spec, workers)[0]
