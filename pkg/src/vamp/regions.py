"""Per-object masks across frames.

Two routes produce tracks: ingesting label maps written by an external
segmenter (one 8-bit PNG per frame, pixel value = object id), or growing
rectangular regions from first-frame seeds and following them with a
translation-only histogram tracker.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import (
    ConfigError,
    EmptyInitialSet,
    FrameCountMismatch,
    LabelMapDimMismatch,
    ManifestMissing,
    MaskOutOfBounds,
    SeedOutOfBounds,
)
from .media import VideoClip, read_gray, write_gray_png

SEED_HALF = 15  # 31x31 fallback square
DILATION = 0.10


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Boolean bitmap inside an inclusive pixel rectangle ``(x0, y0, x1, y1)``."""

    x0: int
    y0: int
    x1: int
    y1: int
    bitmap: np.ndarray

    def __post_init__(self):
        bm = np.asarray(self.bitmap, dtype=bool)
        object.__setattr__(self, "bitmap", bm)
        if bm.shape != (self.height, self.width):
            raise ConfigError(
                f"bitmap shape {bm.shape} does not match bbox {self.bbox}")
        if not bm.any():
            raise ConfigError("a region mask needs at least one true pixel")

    @classmethod
    def rectangle(cls, x0: int, y0: int, x1: int, y1: int) -> "RegionMask":
        return cls(x0, y0, x1, y1, np.ones((y1 - y0 + 1, x1 - x0 + 1), dtype=bool))

    @classmethod
    def from_full(cls, full: np.ndarray) -> "RegionMask":
        ys, xs = np.nonzero(full)
        if len(ys) == 0:
            raise ConfigError("empty mask")
        y0, y1, x0, x1 = ys.min(), ys.max(), xs.min(), xs.max()
        return cls(int(x0), int(y0), int(x1), int(y1), full[y0:y1 + 1, x0:x1 + 1])

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        return (self.x0, self.y0, self.x1, self.y1)

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def height(self) -> int:
        return self.y1 - self.y0 + 1

    @property
    def area(self) -> int:
        return int(self.bitmap.sum())

    def centroid(self) -> tuple[float, float]:
        ys, xs = np.nonzero(self.bitmap)
        return (self.x0 + float(xs.mean()), self.y0 + float(ys.mean()))

    def translated(self, dx: int, dy: int) -> "RegionMask":
        return RegionMask(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy, self.bitmap)

    def inside(self, width: int, height: int) -> bool:
        return 0 <= self.x0 and 0 <= self.y0 and self.x1 < width and self.y1 < height

    def full(self, width: int, height: int) -> np.ndarray:
        out = np.zeros((height, width), dtype=bool)
        out[self.y0:self.y1 + 1, self.x0:self.x1 + 1] = self.bitmap
        return out

    def __eq__(self, other):
        if not isinstance(other, RegionMask):
            return NotImplemented
        return self.bbox == other.bbox and np.array_equal(self.bitmap, other.bitmap)


@dataclass
class ObjectTrack:
    """One object over a contiguous run of frames starting at ``start``."""

    object_id: int
    start: int
    masks: list[RegionMask] = field(default_factory=list)
    segment: int = 0

    def __len__(self) -> int:
        return len(self.masks)

    @property
    def frames(self) -> range:
        return range(self.start, self.start + len(self.masks))

    @property
    def end(self) -> int:
        """Last frame index covered (inclusive)."""
        return self.start + len(self.masks) - 1

    def mask_at(self, t: int) -> RegionMask | None:
        if self.start <= t <= self.end:
            return self.masks[t - self.start]
        return None

    def centroids(self) -> np.ndarray:
        if not self.masks:
            return np.empty((0, 2))
        return np.array([m.centroid() for m in self.masks])


@dataclass(frozen=True, eq=False)
class ObjectPatch:
    """RGB pixels under a mask's bbox; ``mask.bitmap`` marks the object pixels."""

    pixels: np.ndarray
    mask: RegionMask
    frame_index: int

    @property
    def bitmap(self) -> np.ndarray:
        return self.mask.bitmap


# ---------------------------------------------------------------- label maps

def _split_runs(frames: list[int]) -> list[list[int]]:
    runs: list[list[int]] = []
    for t in frames:
        if runs and t == runs[-1][-1] + 1:
            runs[-1].append(t)
        else:
            runs.append([t])
    return runs


def tracks_from_label_maps(label_maps: list[np.ndarray]) -> list[ObjectTrack]:
    """Split each object id's presence into contiguous sub-tracks."""
    per_object: dict[int, dict[int, RegionMask]] = {}
    for t, lm in enumerate(label_maps):
        slices = ndimage.find_objects(lm)
        for k, sl in enumerate(slices, start=1):
            if sl is None:
                continue
            bitmap = lm[sl] == k
            mask = RegionMask(sl[1].start, sl[0].start, sl[1].stop - 1, sl[0].stop - 1, bitmap)
            per_object.setdefault(k, {})[t] = mask
    tracks = []
    for k in sorted(per_object):
        for seg, run in enumerate(_split_runs(sorted(per_object[k]))):
            tracks.append(ObjectTrack(k, run[0], [per_object[k][t] for t in run], segment=seg))
    return tracks


def load_masks(manifest_path: str | os.PathLike, clip: VideoClip | None = None) -> list[ObjectTrack]:
    """Read a label-map manifest.

    The manifest is ``{"frames": [{"index": int, "labelmap": path}], "objects": [...]}``
    with label-map paths relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise ManifestMissing(f"no mask manifest at {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
        entries = sorted(manifest["frames"], key=lambda e: int(e["index"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed mask manifest {manifest_path}: {exc}") from exc
    indices = [int(e["index"]) for e in entries]
    n_frames = len(clip) if clip is not None else (max(indices) + 1 if indices else 0)
    if clip is not None and (len(entries) != n_frames or indices != list(range(n_frames))):
        raise FrameCountMismatch(
            f"manifest lists {len(entries)} frames, clip has {n_frames}")
    if len(set(indices)) != len(indices) or any(i < 0 for i in indices):
        raise ConfigError("manifest frame indices must be unique and non-negative")

    read = {i: read_gray(manifest_path.parent / e["labelmap"]) for i, e in zip(indices, entries)}
    if clip is not None:
        shape = (clip.height, clip.width)
    elif read:
        shape = next(iter(read.values())).shape
    else:
        return []
    for i, lm in read.items():
        if lm.shape != shape:
            raise LabelMapDimMismatch(
                f"label map for frame {i} is {lm.shape[1]}x{lm.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}")
    empty = np.zeros(shape, dtype=np.uint8)
    return tracks_from_label_maps([read.get(t, empty) for t in range(n_frames)])


def save_masks(tracks: list[ObjectTrack], n_frames: int, width: int, height: int,
               out_dir: str | os.PathLike) -> Path:
    """Write label maps plus ``manifest.json``; later tracks paint over earlier ones."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    maps = np.zeros((n_frames, height, width), dtype=np.uint8)
    for tr in tracks:
        if not 1 <= tr.object_id <= 255:
            raise ConfigError(f"object id {tr.object_id} does not fit an 8-bit label map")
        for t, m in zip(tr.frames, tr.masks):
            maps[t][m.full(width, height)] = tr.object_id
    entries = []
    for t in range(n_frames):
        name = f"labelmap_{t:05d}.png"
        write_gray_png(maps[t], out_dir / name)
        entries.append({"index": t, "labelmap": name})
    ids = sorted({tr.object_id for tr in tracks})
    manifest = {"frames": entries, "objects": [{"id": k, "name": f"object_{k}"} for k in ids]}
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


# ---------------------------------------------------------------- seeds

def region_from_seed(frame: np.ndarray, seed, cluster_points=None) -> RegionMask:
    """Filled rectangle around a seed.

    With two or more cluster points the rectangle is their bounding box
    grown by 10% of its size on each side; otherwise a 31x31 square
    centred on the seed.  Either way it is clamped to the frame.
    """
    h, w = frame.shape[:2]
    sx, sy = float(seed[0]), float(seed[1])
    if not (0 <= sx < w and 0 <= sy < h):
        raise SeedOutOfBounds(f"seed ({sx}, {sy}) outside {w}x{h} frame")
    pts = None if cluster_points is None else np.asarray(cluster_points, dtype=float).reshape(-1, 2)
    if pts is not None and len(pts) >= 2:
        xmin, ymin = pts.min(axis=0)
        xmax, ymax = pts.max(axis=0)
        dx = DILATION * (xmax - xmin)
        dy = DILATION * (ymax - ymin)
        x0, x1 = int(np.floor(xmin - dx)), int(np.ceil(xmax + dx))
        y0, y1 = int(np.floor(ymin - dy)), int(np.ceil(ymax + dy))
    else:
        cx, cy = int(np.floor(sx + 0.5)), int(np.floor(sy + 0.5))
        x0, x1 = cx - SEED_HALF, cx + SEED_HALF
        y0, y1 = cy - SEED_HALF, cy + SEED_HALF
    x0, y0 = max(x0, 0), max(y0, 0)
    x1, y1 = min(x1, w - 1), min(y1, h - 1)
    return RegionMask.rectangle(x0, y0, x1, y1)


# ---------------------------------------------------------------- tracker

@dataclass(frozen=True)
class TrackerParams:
    search_radius: int = 16
    accept_threshold: float = 0.6
    bins: int = 16
    cells: int = 3  # cells per side of the spatial histogram grid
    max_overlap: float = 0.5


def _edges(length: int, cells: int) -> np.ndarray:
    cells = max(1, min(cells, length))
    return np.round(np.linspace(0, length, cells + 1)).astype(np.intp)


def _integral_onehot(region: np.ndarray, bins: int) -> np.ndarray:
    q = (region.astype(np.intp) * bins) // 256
    h, w, _ = q.shape
    onehot = np.zeros((h, w, 3 * bins), dtype=np.int32)
    idx = q + np.arange(3) * bins
    rows, cols = np.indices((h, w))
    for c in range(3):
        onehot[rows, cols, idx[..., c]] = 1
    integral = np.zeros((h + 1, w + 1, 3 * bins), dtype=np.int32)
    integral[1:, 1:] = onehot.cumsum(0).cumsum(1)
    return integral


def _cell_histograms(integral: np.ndarray, row_off: np.ndarray, col_off: np.ndarray,
                     ey: np.ndarray, ex: np.ndarray) -> np.ndarray:
    """Counts per (row_off, col_off, cell_y, cell_x, bin)."""
    r0 = (row_off[:, None] + ey[None, :-1])[:, None, :, None]
    r1 = (row_off[:, None] + ey[None, 1:])[:, None, :, None]
    c0 = (col_off[:, None] + ex[None, :-1])[None, :, None, :]
    c1 = (col_off[:, None] + ex[None, 1:])[None, :, None, :]
    return integral[r1, c1] - integral[r0, c1] - integral[r1, c0] + integral[r0, c0]


def histogram_similarity(a: np.ndarray, b: np.ndarray, bins: int = 16, cells: int = 3) -> float:
    """Cell-averaged per-channel histogram intersection of two equal-size RGB patches."""
    h, w = a.shape[:2]
    ey, ex = _edges(h, cells), _edges(w, cells)
    zero = np.zeros(1, dtype=np.intp)
    ha = _cell_histograms(_integral_onehot(a, bins), zero, zero, ey, ex)[0, 0]
    hb = _cell_histograms(_integral_onehot(b, bins), zero, zero, ey, ex)[0, 0]
    area = (np.diff(ey)[:, None] * np.diff(ex)[None, :])[..., None] * 3.0
    return float((np.minimum(ha, hb) / area).sum(axis=-1).mean())


def _score_map(prev_frame: np.ndarray, frame: np.ndarray, mask: RegionMask,
               params: TrackerParams):
    """Similarity of every admissible translation of ``mask``'s bbox."""
    h, w = frame.shape[:2]
    r = params.search_radius
    dx_lo, dx_hi = max(-r, -mask.x0), min(r, w - 1 - mask.x1)
    dy_lo, dy_hi = max(-r, -mask.y0), min(r, h - 1 - mask.y1)
    ey, ex = _edges(mask.height, params.cells), _edges(mask.width, params.cells)
    area = (np.diff(ey)[:, None] * np.diff(ex)[None, :])[..., None] * 3.0

    prev = prev_frame[mask.y0:mask.y1 + 1, mask.x0:mask.x1 + 1]
    zero = np.zeros(1, dtype=np.intp)
    ref = _cell_histograms(_integral_onehot(prev, params.bins), zero, zero, ey, ex)[0, 0]

    roi = frame[mask.y0 + dy_lo:mask.y1 + dy_hi + 1, mask.x0 + dx_lo:mask.x1 + dx_hi + 1]
    integral = _integral_onehot(roi, params.bins)
    rows = np.arange(dy_hi - dy_lo + 1)
    cols = np.arange(dx_hi - dx_lo + 1)
    cand = _cell_histograms(integral, rows, cols, ey, ex)
    inter = (np.minimum(cand, ref) / area).sum(axis=-1)
    scores = inter.mean(axis=(-1, -2))
    dys = rows + dy_lo
    dxs = cols + dx_lo
    return scores, dys, dxs


def _ranked_candidates(scores: np.ndarray, dys: np.ndarray, dxs: np.ndarray):
    """Flat candidates, best first; exact ties go to the smallest displacement."""
    gy, gx = np.meshgrid(dys, dxs, indexing="ij")
    s = scores.ravel()
    dist = (gy * gy + gx * gx).ravel()
    order = np.lexsort((gx.ravel(), gy.ravel(), dist, -s))
    return s[order], gy.ravel()[order], gx.ravel()[order]


def _iou(a: RegionMask, b: RegionMask) -> float:
    ix = min(a.x1, b.x1) - max(a.x0, b.x0) + 1
    iy = min(a.y1, b.y1) - max(a.y0, b.y0) + 1
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.width * a.height + b.width * b.height - inter)


def track_regions(clip: VideoClip, initial: list[RegionMask],
                  params: TrackerParams | None = None) -> list[ObjectTrack]:
    """Follow each initial mask through the clip by translation search.

    Per frame, each live object scores every bbox translation within
    ``search_radius`` by its cell-histogram similarity to the object's
    previous patch.  Objects claim windows greedily in order of their best
    score (ties by object id); a window overlapping an already-claimed one
    by more than ``max_overlap`` IoU (or more than the two objects overlapped
    before) is skipped.  An object whose best admissible score is below
    ``accept_threshold`` ends its track at the previous frame.
    """
    params = params or TrackerParams()
    if not initial:
        raise EmptyInitialSet("no initial regions to track")
    for m in initial:
        if not m.inside(clip.width, clip.height):
            raise MaskOutOfBounds(f"initial mask {m.bbox} outside the frame")
    tracks = [ObjectTrack(k + 1, 0, [m]) for k, m in enumerate(initial)]
    live = list(range(len(tracks)))
    for t in range(1, len(clip)):
        if not live:
            break
        prev_frame, frame = clip[t - 1], clip[t]
        ranked = {}
        for k in live:
            scores, dys, dxs = _score_map(prev_frame, frame, tracks[k].masks[-1], params)
            ranked[k] = _ranked_candidates(scores, dys, dxs)
        order = sorted(live, key=lambda k: (-ranked[k][0][0], tracks[k].object_id))
        claimed: dict[int, RegionMask] = {}
        for k in order:
            prev_mask = tracks[k].masks[-1]
            s, dy, dx = ranked[k]
            chosen = None
            for score, cy, cx in zip(s, dy, dx):
                if score < params.accept_threshold:
                    break
                cand = prev_mask.translated(int(cx), int(cy))
                ok = True
                for j, other in claimed.items():
                    limit = max(params.max_overlap, _iou(prev_mask, tracks[j].masks[-1])) + 1e-9
                    if _iou(cand, other) > limit:
                        ok = False
                        break
                if ok:
                    chosen = cand
                    break
            if chosen is not None:
                claimed[k] = chosen
        for k in live:
            if k in claimed:
                tracks[k].masks.append(claimed[k])
        live = [k for k in live if k in claimed]
    return tracks


# ---------------------------------------------------------------- patches

def extract_patch(frame: np.ndarray, mask: RegionMask, frame_index: int) -> ObjectPatch:
    h, w = frame.shape[:2]
    if not mask.inside(w, h):
        raise MaskOutOfBounds(f"mask {mask.bbox} exceeds {w}x{h} frame")
    pixels = frame[mask.y0:mask.y1 + 1, mask.x0:mask.x1 + 1]
    return ObjectPatch(pixels, mask, frame_index)


def contour(mask: RegionMask) -> np.ndarray:
    """True pixels with a false or out-of-box 4-neighbour, as (x, y) rows."""
    bm = np.pad(mask.bitmap, 1, constant_values=False)
    interior = bm[:-2, 1:-1] & bm[2:, 1:-1] & bm[1:-1, :-2] & bm[1:-1, 2:]
    edge = mask.bitmap & ~interior
    ys, xs = np.nonzero(edge)
    return np.column_stack([xs + mask.x0, ys + mask.y0]).astype(np.float64)
