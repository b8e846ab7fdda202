"""Colour, shape and texture consistency of one object across a frame pair."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateFeatureVector,
    EmptyMask,
    EmptySet,
    InvalidWeights,
    PatchTooSmall,
    UnnormalizedInput,
)
from .media import resize, resize_nearest, to_grayscale
from .regions import ObjectPatch, contour

CHANNELS = {"r": 0, "g": 1, "b": 2}
SHAPE_MODES = ("single_wrap", "as_written")
TEXTURE_SIZE = 64
LEVELS = 256

# (dx, dy) per angle index: 0, pi/4, pi/2, 3pi/4 with y pointing down
GLCM_OFFSETS = ((1, 0), (1, -1), (0, -1), (-1, -1))
GLCM_ANGLES = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)
FEATURE_NAMES = ("contrast", "dissimilarity", "homogeneity", "energy", "correlation")

_NORM_TOL = 1e-6


@dataclass(frozen=True)
class AppearanceWeights:
    color: float = 1 / 3
    shape: float = 1 / 3
    texture: float = 1 / 3

    def __post_init__(self):
        ws = (self.color, self.shape, self.texture)
        if any(not math.isfinite(w) or w < 0 for w in ws):
            raise InvalidWeights(f"appearance weights must be finite and >= 0: {ws}")
        if abs(math.fsum(ws) - 1.0) > 1e-9:
            raise InvalidWeights(f"appearance weights must sum to 1, got {math.fsum(ws)}")

    def combine(self, color: float, shape: float, texture: float) -> float:
        return self.color * color + self.shape * shape + self.texture * texture


# ---------------------------------------------------------------- colour

def _object_pixels(patch: ObjectPatch) -> np.ndarray:
    px = patch.pixels[patch.bitmap]
    if len(px) == 0:
        raise EmptyMask("patch has no object pixels")
    return px


def color_histogram(patch: ObjectPatch, channel) -> np.ndarray:
    """256-bin normalised histogram of one channel over the object pixels."""
    c = CHANNELS[channel] if isinstance(channel, str) else int(channel)
    values = _object_pixels(patch)[:, c]
    counts = np.bincount(values, minlength=LEVELS).astype(np.float64)
    return counts / counts.sum()


def emd_1d(a: np.ndarray, b: np.ndarray) -> float:
    """Earth mover's distance between two 256-bin histograms.

    Ground distance is ``|j - k| / 255`` so the result lies in [0, 1]; for
    ordered bins the optimal transport cost is the L1 distance between the
    cumulative distributions.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise UnnormalizedInput(f"histogram shapes differ: {a.shape} vs {b.shape}")
    for h in (a, b):
        if np.any(h < 0) or abs(h.sum() - 1.0) > _NORM_TOL:
            raise UnnormalizedInput("histograms must be non-negative and sum to 1")
    d = float(np.abs(np.cumsum(a - b)[:-1]).sum()) / (len(a) - 1)
    return min(max(d, 0.0), 1.0)


def color_similarity(p: ObjectPatch, q: ObjectPatch) -> float:
    emds = [emd_1d(color_histogram(p, c), color_histogram(q, c)) for c in "rgb"]
    return 1.0 - math.fsum(emds) / 3.0


# ---------------------------------------------------------------- shape

def hausdorff_directed(a, b) -> float:
    """max over a of the distance to the nearest point of b.

    The KD-tree only picks the nearest neighbour; the distance itself is
    recomputed as ``sqrt(dx*dx + dy*dy)`` so the result is bit-identical to
    an exhaustive search.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("Hausdorff distance needs two non-empty point sets")
    k = min(2, len(b))
    _, idx = cKDTree(b).query(a, k=k)
    idx = idx.reshape(len(a), k)
    best = np.full(len(a), np.inf)
    # re-check the two nearest to absorb tree rounding on near-ties
    for col in range(idx.shape[1]):
        d = a - b[idx[:, col]]
        best = np.minimum(best, d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])
    return float(np.sqrt(best.max()))


def hausdorff(a, b) -> float:
    return max(hausdorff_directed(a, b), hausdorff_directed(b, a))


def _centred_contour(patch: ObjectPatch, center: bool) -> np.ndarray:
    if not patch.bitmap.any():
        raise EmptyMask("patch has no object pixels")
    pts = contour(patch.mask)
    return pts - pts.mean(axis=0) if center else pts


def shape_similarity(p: ObjectPatch, q: ObjectPatch, mode: str = "single_wrap",
                     center: bool = True) -> float:
    """Contour agreement from the symmetric Hausdorff distance ``H``.

    ``single_wrap`` returns ``1 / (1 + H)``.  ``as_written`` applies the
    reciprocal wrap twice, ``1 / (1 + 1 / (1 + H))``, which equals 0.5 for
    identical shapes.
    """
    if mode not in SHAPE_MODES:
        raise ValueError(f"unknown shape mode {mode!r}")
    H = hausdorff(_centred_contour(p, center), _centred_contour(q, center))
    inner = 1.0 / (1.0 + H)
    return inner if mode == "single_wrap" else 1.0 / (1.0 + inner)


# ---------------------------------------------------------------- texture

def _angle_index(angle) -> int:
    if isinstance(angle, (int, np.integer)) and 0 <= int(angle) < 4:
        return int(angle)
    for k, a in enumerate(GLCM_ANGLES):
        if math.isclose(float(angle), a, abs_tol=1e-9):
            return k
    raise ValueError(f"unsupported GLCM angle {angle!r}")


def glcm(gray: np.ndarray, angle, mask: np.ndarray | None = None) -> np.ndarray:
    """Symmetric, normalised 256x256 co-occurrence matrix at distance 1.

    ``angle`` is an index 0..3 or one of 0, pi/4, pi/2, 3pi/4.  With a
    ``mask``, only pairs whose two pixels are both inside it are counted.
    """
    gray = np.asarray(gray)
    h, w = gray.shape
    if h < 2 or w < 2:
        raise PatchTooSmall(f"GLCM needs at least a 2x2 patch, got {w}x{h}")
    dx, dy = GLCM_OFFSETS[_angle_index(angle)]
    ys = slice(max(0, -dy), h - max(0, dy))
    xs = slice(max(0, -dx), w - max(0, dx))
    yt = slice(max(0, -dy) + dy, h - max(0, dy) + dy)
    xt = slice(max(0, -dx) + dx, w - max(0, dx) + dx)
    src = gray[ys, xs].astype(np.intp)
    dst = gray[yt, xt].astype(np.intp)
    if mask is not None:
        keep = mask[ys, xs] & mask[yt, xt]
        src, dst = src[keep], dst[keep]
    counts = np.bincount((src * LEVELS + dst).ravel(), minlength=LEVELS * LEVELS)
    m = counts.reshape(LEVELS, LEVELS).astype(np.float64)
    m += m.T
    total = m.sum()
    if total == 0:
        raise PatchTooSmall("no co-occurring pixel pairs inside the mask")
    return m / total


_I, _J = np.indices((LEVELS, LEVELS), dtype=np.float64)
_DIFF = _I - _J


def glcm_features(m: np.ndarray) -> np.ndarray:
    """(contrast, dissimilarity, homogeneity, energy, correlation) of a normalised GLCM.

    Energy is the angular second moment ``sum(P**2)``.  Correlation is 1
    when either marginal has zero variance.
    """
    m = np.asarray(m, dtype=np.float64)
    if np.any(m < 0) or abs(m.sum() - 1.0) > _NORM_TOL:
        raise UnnormalizedInput("GLCM must be non-negative and sum to 1")
    n = m.shape[0]
    i, j = (_I, _J) if n == LEVELS else np.indices(m.shape, dtype=np.float64)
    diff = _DIFF if n == LEVELS else i - j
    contrast = float((m * diff * diff).sum())
    dissimilarity = float((m * np.abs(diff)).sum())
    homogeneity = float((m / (1.0 + diff * diff)).sum())
    energy = float((m * m).sum())
    mu_i = float((i * m).sum())
    mu_j = float((j * m).sum())
    sd_i = math.sqrt(float((m * (i - mu_i) ** 2).sum()))
    sd_j = math.sqrt(float((m * (j - mu_j) ** 2).sum()))
    if sd_i * sd_j < 1e-12:
        correlation = 1.0
    else:
        correlation = float((m * (i - mu_i) * (j - mu_j)).sum()) / (sd_i * sd_j)
    return np.array([contrast, dissimilarity, homogeneity, energy, correlation])


def texture_features(patch: ObjectPatch, size: int = TEXTURE_SIZE) -> np.ndarray:
    """20-vector: for each angle in order, the five GLCM properties."""
    if not patch.bitmap.any():
        raise EmptyMask("patch has no object pixels")
    gray = to_grayscale(resize(patch.pixels, size, size))
    mask = resize_nearest(patch.bitmap, size, size)
    feats = []
    for k in range(4):
        try:
            m = glcm(gray, k, mask)
        except PatchTooSmall:
            # mask too sparse after resampling: fall back to the whole box
            m = glcm(gray, k)
        feats.append(glcm_features(m))
    return np.concatenate(feats)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0 or nv == 0:
        raise DegenerateFeatureVector("zero-norm texture feature vector")
    return min(1.0, max(-1.0, float(np.dot(u, v)) / (nu * nv)))


def texture_similarity(p: ObjectPatch, q: ObjectPatch) -> float:
    return cosine(texture_features(p), texture_features(q))


# ---------------------------------------------------------------- aggregate

def appearance_components(p: ObjectPatch, q: ObjectPatch, shape_mode: str = "single_wrap",
                          center: bool = True) -> tuple[float, float, float]:
    return (color_similarity(p, q),
            shape_similarity(p, q, shape_mode, center),
            texture_similarity(p, q))


def appearance_score(p: ObjectPatch, q: ObjectPatch, w: AppearanceWeights | None = None,
                     shape_mode: str = "single_wrap", center: bool = True) -> float:
    w = w or AppearanceWeights()
    return w.combine(*appearance_components(p, q, shape_mode, center))
