"""Seed points for region discovery in the first frame.

Four samplers: uniform random, uniform grid, DoG keypoints, and DoG
keypoints merged by DBSCAN into cluster centroids.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dbscan import ClusterResult, cluster_centroids, dbscan
from .errors import ZeroCount
from .keypoints import DetectorParams, detect_keypoints, keypoint_array
from .media import to_grayscale

SAMPLERS = ("random", "grid", "sift")


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """PCG64 stream keyed by ``(seed, *keys)``; independent per key."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def sample_random(width: int, height: int, n: int, seed: int) -> np.ndarray:
    """``n`` points uniform over ``[0, width) x [0, height)``."""
    if n < 1:
        raise ZeroCount("n must be >= 1")
    rng = make_rng(seed)
    pts = rng.random((n, 2)) * np.array([width, height], dtype=np.float64)
    # guard against x * width rounding up to width
    upper = np.nextafter(np.array([width, height], dtype=np.float64), 0)
    return np.minimum(pts, upper)


def sample_grid(width: int, height: int, nx: int, ny: int) -> np.ndarray:
    """Centres of an ``nx`` by ``ny`` grid of cells, row by row."""
    if nx < 1 or ny < 1:
        raise ZeroCount("grid dimensions must be >= 1")
    xs = (np.arange(nx) + 0.5) * width / nx
    ys = (np.arange(ny) + 0.5) * height / ny
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class SiftClusterParams:
    detector: DetectorParams = DetectorParams()
    eps_fraction: float = 0.05  # of the frame diagonal
    eps: float | None = None  # absolute override in pixels
    min_pts: int = 4
    max_regions: int = 10


@dataclass
class SeedSet:
    """Seeds plus, for clustered seeds, the member points behind each one."""

    seeds: np.ndarray
    members: list[np.ndarray]
    keypoints: int = 0
    noise: int = 0


def sift_cluster_seeds(frame: np.ndarray, params: SiftClusterParams | None = None) -> SeedSet:
    """Cluster DoG keypoints of ``frame`` and return up to ``max_regions`` centroids."""
    params = params or SiftClusterParams()
    gray = to_grayscale(frame)
    kps = detect_keypoints(gray, params.detector)
    pts = keypoint_array(kps)
    h, w = gray.shape
    eps = params.eps if params.eps is not None else params.eps_fraction * float(np.hypot(w, h))
    result = dbscan(pts, eps, params.min_pts)
    kept = ClusterResult(result.clusters[:params.max_regions], result.noise)
    centroids = cluster_centroids(pts, kept)
    members = [pts[m] for m in kept.clusters]
    return SeedSet(centroids, members, keypoints=len(kps), noise=len(result.noise))
