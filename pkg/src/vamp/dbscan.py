"""Density-based clustering of 2-D points.

Border points (non-core points within ``eps`` of a core point) join the
cluster of their nearest core neighbour, with exact distance ties broken
by the neighbour's (x, y) coordinates.  That makes the partition a pure
function of the point *set*, independent of input order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import InvalidEps


@dataclass
class ClusterResult:
    clusters: list[list[int]] = field(default_factory=list)
    noise: list[int] = field(default_factory=list)

    def labels(self, n: int) -> np.ndarray:
        out = np.full(n, -1, dtype=np.intp)
        for k, members in enumerate(self.clusters):
            out[members] = k
        return out


def _check(points: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    if not eps > 0:
        raise InvalidEps(f"eps must be > 0, got {eps}")
    if min_pts < 1:
        raise InvalidEps(f"min_pts must be >= 1, got {min_pts}")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return pts


def neighbour_pairs(points: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """All ordered pairs (i, j), i != j, with squared distance <= eps**2."""
    tree = cKDTree(points)
    # slack on the tree query, exact squared-distance test afterwards
    pairs = tree.query_pairs(eps * (1 + 1e-9) + 1e-12, output_type="ndarray")
    if len(pairs) == 0:
        return np.empty(0, np.intp), np.empty(0, np.intp)
    d = points[pairs[:, 0]] - points[pairs[:, 1]]
    keep = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] <= eps * eps
    pairs = pairs[keep]
    i = np.concatenate([pairs[:, 0], pairs[:, 1]])
    j = np.concatenate([pairs[:, 1], pairs[:, 0]])
    return i, j


def canonical_order(points: np.ndarray, clusters: list[list[int]]) -> list[list[int]]:
    """Largest first; ties by the lexicographically smallest member point."""
    def key(members):
        sub = points[members]
        first = min(zip(sub[:, 0].tolist(), sub[:, 1].tolist()))
        return (-len(members), first)
    return sorted((sorted(m) for m in clusters), key=key)


def assign_borders(points: np.ndarray, core: np.ndarray, core_label: np.ndarray,
                   i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Label each non-core point by its nearest core neighbour (or -1)."""
    labels = np.where(core, core_label, -1)
    sel = ~core[i] & core[j]
    if not np.any(sel):
        return labels
    bi, cj = i[sel], j[sel]
    d = points[bi] - points[cj]
    d2 = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
    order = np.lexsort((points[cj, 1], points[cj, 0], d2, bi))
    bi, cj = bi[order], cj[order]
    first = np.ones(len(bi), dtype=bool)
    first[1:] = bi[1:] != bi[:-1]
    labels[bi[first]] = core_label[cj[first]]
    return labels


def dbscan(points, eps: float, min_pts: int) -> ClusterResult:
    """Cluster ``(n, 2)`` points; ``min_pts`` counts the point itself."""
    pts = _check(points, eps, min_pts)
    n = len(pts)
    if n == 0:
        return ClusterResult()
    i, j = neighbour_pairs(pts, eps)
    degree = np.bincount(i, minlength=n) + 1
    core = degree >= min_pts
    core_idx = np.flatnonzero(core)
    core_label = np.full(n, -1, dtype=np.intp)
    if len(core_idx):
        both = core[i] & core[j]
        graph = coo_matrix((np.ones(int(both.sum())), (i[both], j[both])), shape=(n, n))
        _, comp = connected_components(graph, directed=False)
        core_label[core] = comp[core]
    labels = assign_borders(pts, core, core_label, i, j)
    groups: dict[int, list[int]] = {}
    noise = []
    for idx, lab in enumerate(labels.tolist()):
        if lab < 0:
            noise.append(idx)
        else:
            groups.setdefault(lab, []).append(idx)
    return ClusterResult(canonical_order(pts, list(groups.values())), noise)


def cluster_centroids(points, result: ClusterResult) -> np.ndarray:
    """Mean location of each cluster, in cluster order."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if not result.clusters:
        return np.empty((0, 2))
    return np.array([pts[m].mean(axis=0) for m in result.clusters])
