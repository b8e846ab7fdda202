"""Difference-of-Gaussians keypoint detection (locations only, no descriptors)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import FrameTooSmall

MIN_SIDE = 16
_BORDER = 2
_MAX_REFINE_STEPS = 5


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    scale: float
    response: float


@dataclass(frozen=True)
class DetectorParams:
    octaves: int = 4
    scales_per_octave: int = 3
    sigma: float = 1.6
    contrast_threshold: float = 0.04
    edge_threshold: float = 10.0
    assumed_blur: float = 0.5


def _octave_stack(base: np.ndarray, params: DetectorParams) -> np.ndarray:
    s = params.scales_per_octave
    k = 2.0 ** (1.0 / s)
    levels = [base]
    sigma_prev = params.sigma
    for _ in range(s + 2):
        sigma_total = sigma_prev * k
        inc = np.sqrt(sigma_total ** 2 - sigma_prev ** 2)
        levels.append(ndimage.gaussian_filter(levels[-1], inc, mode="nearest"))
        sigma_prev = sigma_total
    return np.stack(levels)


def _refine(dog: np.ndarray, s: int, y: int, x: int, n_scales: int):
    """Quadratic fit around a discrete extremum; None when it drifts away."""
    n_layers, h, w = dog.shape
    for _ in range(_MAX_REFINE_STEPS):
        cube = dog[s - 1:s + 2, y - 1:y + 2, x - 1:x + 2]
        grad = 0.5 * np.array([
            cube[1, 1, 2] - cube[1, 1, 0],
            cube[1, 2, 1] - cube[1, 0, 1],
            cube[2, 1, 1] - cube[0, 1, 1],
        ])
        c = cube[1, 1, 1]
        dxx = cube[1, 1, 2] + cube[1, 1, 0] - 2 * c
        dyy = cube[1, 2, 1] + cube[1, 0, 1] - 2 * c
        dss = cube[2, 1, 1] + cube[0, 1, 1] - 2 * c
        dxy = 0.25 * (cube[1, 2, 2] - cube[1, 2, 0] - cube[1, 0, 2] + cube[1, 0, 0])
        dxs = 0.25 * (cube[2, 1, 2] - cube[2, 1, 0] - cube[0, 1, 2] + cube[0, 1, 0])
        dys = 0.25 * (cube[2, 2, 1] - cube[2, 0, 1] - cube[0, 2, 1] + cube[0, 0, 1])
        hess = np.array([[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]])
        try:
            offset = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return None
        if np.all(np.abs(offset) < 0.5):
            value = c + 0.5 * grad @ offset
            return x, y, s, offset, value, dxx, dyy, dxy
        x += int(np.round(offset[0]))
        y += int(np.round(offset[1]))
        s += int(np.round(offset[2]))
        if not (1 <= s <= n_scales and _BORDER <= y < h - _BORDER
                and _BORDER <= x < w - _BORDER):
            return None
    return None


def detect_keypoints(gray: np.ndarray, params: DetectorParams | None = None) -> list[Keypoint]:
    """Scale-space extrema of the DoG pyramid, strongest first.

    Candidates must pass a contrast threshold on the interpolated DoG value
    and the principal-curvature edge test.  Output order is fully
    determined by (response, y, x).
    """
    params = params or DetectorParams()
    if gray.ndim != 2:
        raise ValueError("detect_keypoints expects a 2-D gray image")
    h, w = gray.shape
    if h < MIN_SIDE or w < MIN_SIDE:
        raise FrameTooSmall(f"frame {w}x{h} is smaller than {MIN_SIDE}x{MIN_SIDE}")

    s = params.scales_per_octave
    img = gray.astype(np.float64) / 255.0
    pre = np.sqrt(max(params.sigma ** 2 - params.assumed_blur ** 2, 0.01))
    base = ndimage.gaussian_filter(img, pre, mode="nearest")
    n_oct = max(1, min(params.octaves, int(np.floor(np.log2(min(h, w) / 8.0))) + 1))
    prelim = 0.5 * params.contrast_threshold / s
    final = params.contrast_threshold / s
    edge_r = params.edge_threshold
    edge_limit = (edge_r + 1) ** 2 / edge_r

    found: list[Keypoint] = []
    for octave in range(n_oct):
        gauss = _octave_stack(base, params)
        dog = gauss[1:] - gauss[:-1]
        mx = ndimage.maximum_filter(dog, size=3, mode="nearest")
        mn = ndimage.minimum_filter(dog, size=3, mode="nearest")
        cand = ((dog == mx) | (dog == mn)) & (np.abs(dog) > prelim)
        cand[0] = cand[-1] = False
        cand[:, :_BORDER] = cand[:, -_BORDER:] = False
        cand[:, :, :_BORDER] = cand[:, :, -_BORDER:] = False
        factor = 2.0 ** octave
        for si, yi, xi in zip(*np.nonzero(cand)):
            fit = _refine(dog, int(si), int(yi), int(xi), s)
            if fit is None:
                continue
            x, y, sl, offset, value, dxx, dyy, dxy = fit
            if abs(value) < final:
                continue
            tr = dxx + dyy
            det = dxx * dyy - dxy * dxy
            if det <= 0 or tr * tr / det >= edge_limit:
                continue
            found.append(Keypoint(
                x=float((x + offset[0]) * factor),
                y=float((y + offset[1]) * factor),
                scale=float(params.sigma * 2.0 ** (octave + (sl + offset[2]) / s)),
                response=float(abs(value)),
            ))
        # next octave starts from the level with twice the base blur
        base = gauss[s][::2, ::2]
        if min(base.shape) < 8:
            break

    # drop duplicates produced by refinement converging to the same location
    unique: dict[tuple[float, float, float], Keypoint] = {}
    for kp in found:
        key = (round(kp.x, 6), round(kp.y, 6), round(kp.scale, 6))
        if key not in unique or kp.response > unique[key].response:
            unique[key] = kp
    return sorted(unique.values(), key=lambda k: (-k.response, k.y, k.x, k.scale))


def keypoint_array(keypoints: list[Keypoint]) -> np.ndarray:
    """``(n, 2)`` array of (x, y) locations."""
    if not keypoints:
        return np.empty((0, 2))
    return np.array([(k.x, k.y) for k in keypoints], dtype=np.float64)
