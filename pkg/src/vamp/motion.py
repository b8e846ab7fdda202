"""Velocity and acceleration consistency of centroid trajectories."""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np

from .errors import EmptySequence, InvalidWeights, TooShort

NORMALIZATIONS = ("frame_diagonal", "raw_pixels")
STATIC_SPEED = 1e-9


@dataclass(frozen=True)
class MotionWeights:
    velocity: float = 0.5
    acceleration: float = 0.5

    def __post_init__(self):
        ws = (self.velocity, self.acceleration)
        if any(not math.isfinite(w) or w < 0 for w in ws):
            raise InvalidWeights(f"motion weights must be finite and >= 0: {ws}")
        if abs(math.fsum(ws) - 1.0) > 1e-9:
            raise InvalidWeights(f"motion weights must sum to 1, got {math.fsum(ws)}")


@dataclass
class Trajectory:
    """Centroids ``(n, 2)`` of one object in consecutive frames."""

    centroids: np.ndarray
    normalization: str = "frame_diagonal"
    frame_size: tuple[int, int] | None = None  # (width, height)

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64).reshape(-1, 2)
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.normalization == "frame_diagonal" and self.frame_size is None:
            raise ValueError("frame_diagonal normalization needs frame_size")

    @property
    def scale(self) -> float:
        if self.normalization == "raw_pixels":
            return 1.0
        w, h = self.frame_size
        return math.hypot(w, h)


@dataclass(frozen=True)
class MotionResult:
    velocity: float
    acceleration: float
    score: float
    partial: bool  # True when the trajectory is too short for accelerations


def velocities(traj: Trajectory) -> np.ndarray:
    """Centroid speed per step, in the trajectory's units."""
    c = traj.centroids
    if len(c) < 2:
        raise TooShort("velocities need at least 2 centroids")
    d = np.diff(c, axis=0)
    v = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])
    return v / traj.scale if traj.normalization == "frame_diagonal" else v


def _mean(xs) -> float:
    return math.fsum(xs) / len(xs)


def _pvariance(xs) -> float:
    m = _mean(xs)
    return math.fsum((x - m) * (x - m) for x in xs) / len(xs)


def velocity_consistency(v) -> float:
    """exp(-std/mean) with population statistics; 1.0 for a static object."""
    v = [float(x) for x in v]
    if not v:
        raise EmptySequence("no velocities")
    mean = _mean(v)
    if mean < STATIC_SPEED:
        return 1.0
    return math.exp(-math.sqrt(_pvariance(v)) / mean)


def _exact_cv(sq_steps: list[Fraction]) -> float:
    """std/mean of ``sqrt(sq_steps)`` evaluated on exact ratios.

    Steps are divided by the largest one before the square root, so any
    exact rescaling of the coordinates leaves the inputs, and hence the
    result, bit-identical.
    """
    top = max(sq_steps)
    with localcontext() as ctx:
        ctx.prec = 50
        ratios = [Decimal(r.numerator) / Decimal(r.denominator)
                  for r in (s / top for s in sq_steps)]
        roots = [r.sqrt() for r in ratios]
        n = Decimal(len(roots))
        mean = sum(roots) / n
        var = sum((r - mean) * (r - mean) for r in roots) / n
        return float(var.sqrt() / mean)


def velocity_score(traj: Trajectory) -> float:
    """Velocity consistency computed directly from centroids.

    Matches ``velocity_consistency(velocities(traj))`` up to rounding but
    is exactly invariant to scaling the coordinates.
    """
    v = velocities(traj)
    if _mean(v) < STATIC_SPEED:
        return 1.0
    c = [(Fraction(x), Fraction(y)) for x, y in traj.centroids.tolist()]
    sq = [(c[i + 1][0] - c[i][0]) ** 2 + (c[i + 1][1] - c[i][1]) ** 2 for i in range(len(c) - 1)]
    return math.exp(-_exact_cv(sq))


def accelerations(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if len(v) < 2:
        raise TooShort("accelerations need at least 2 velocities")
    return v[1:] - v[:-1]


def acceleration_consistency(a) -> float:
    """exp(-Var(a)), population variance."""
    a = [float(x) for x in a]
    if not a:
        raise EmptySequence("no accelerations")
    return math.exp(-_pvariance(a))


def motion_components(traj: Trajectory, w: MotionWeights | None = None) -> MotionResult:
    w = w or MotionWeights()
    if len(traj.centroids) < 2:
        raise TooShort("motion score needs at least 2 centroids")
    s_vel = velocity_score(traj)
    v = velocities(traj)
    if len(v) >= 2:
        s_acc, partial = acceleration_consistency(accelerations(v)), False
    else:
        s_acc, partial = 1.0, True
    return MotionResult(s_vel, s_acc, w.velocity * s_vel + w.acceleration * s_acc, partial)


def motion_score(traj: Trajectory, w: MotionWeights | None = None) -> float:
    return motion_components(traj, w).score
