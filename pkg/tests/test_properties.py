"""Randomised invariants checked with hypothesis."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dbscan_oracle import brute_force_dbscan
from vamp.appearance import (AppearanceWeights, emd_1d, glcm, glcm_features, hausdorff_directed)
from vamp.dbscan import dbscan
from vamp.media import resize, to_grayscale
from vamp.motion import Trajectory, acceleration_consistency, accelerations, velocities, velocity_score
from vamp.regions import RegionMask, contour
from vamp.sampling import sample_grid
from vamp.scoring import ScoreBreakdown, sensitivity_sweep

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])

points = arrays(np.float64, st.tuples(st.integers(1, 40), st.just(2)),
                elements=st.integers(-30, 30).map(float))
histograms = arrays(np.float64, 256, elements=st.floats(0, 1)).filter(lambda h: h.sum() > 0).map(
    lambda h: h / h.sum())


@SETTINGS
@given(points, st.floats(0.5, 8), st.integers(1, 6))
def test_dbscan_matches_oracle(pts, eps, min_pts):
    r = dbscan(pts, eps, min_pts)
    assert ({frozenset(c) for c in r.clusters}, set(r.noise)) == brute_force_dbscan(pts, eps, min_pts)


@SETTINGS
@given(histograms, histograms)
def test_emd_symmetric_bounded(a, b):
    d = emd_1d(a, b)
    assert 0 <= d <= 1
    assert d == emd_1d(b, a)
    assert emd_1d(a, a) == 0


@SETTINGS
@given(points, points)
def test_hausdorff_subset_rule(a, b):
    union = np.vstack([a, b])
    assert hausdorff_directed(a, union) == 0
    assert hausdorff_directed(union, union) == 0
    d = hausdorff_directed(a, b)
    assert (d == 0) == set(map(tuple, a)).issubset(set(map(tuple, b)))


@SETTINGS
@given(arrays(np.uint8, st.tuples(st.integers(2, 12), st.integers(2, 12))), st.integers(0, 3))
def test_glcm_symmetric_normalised(img, angle):
    m = glcm(img, angle)
    assert abs(m.sum() - 1) < 1e-9
    assert (m == m.T).all()
    assert np.isfinite(glcm_features(m)).all()


@SETTINGS
@given(st.integers(0, 255), st.integers(1, 40), st.integers(1, 40), st.integers(1, 40), st.integers(1, 40))
def test_resize_keeps_constants(v, h, w, th, tw):
    img = np.full((h, w, 3), v, np.uint8)
    assert (resize(img, tw, th) == v).all()
    assert (to_grayscale(img) == v).all()


@SETTINGS
@given(st.integers(1, 500), st.integers(1, 500), st.integers(1, 30), st.integers(1, 30))
def test_grid_interior(w, h, nx, ny):
    p = sample_grid(w, h, nx, ny)
    assert len(p) == nx * ny
    assert ((p > 0) & (p < [w, h])).all()


@SETTINGS
@given(st.integers(2, 15), st.integers(2, 15))
def test_rectangle_contour_count(w, h):
    assert len(contour(RegionMask.rectangle(0, 0, w - 1, h - 1))) == 2 * (w + h) - 4


quarter_points = arrays(np.float64, st.tuples(st.integers(3, 25), st.just(2)),
                        elements=st.integers(0, 4000).map(lambda v: v / 4))


@SETTINGS
@given(quarter_points, st.sampled_from([0.5, 2.0, 10.0]))
def test_velocity_scale_and_reversal(c, k):
    t = Trajectory(c, "raw_pixels")
    assert velocity_score(t) == velocity_score(Trajectory(c * k, "raw_pixels"))
    r = Trajectory(c[::-1], "raw_pixels")
    assert velocity_score(t) == velocity_score(r)
    assert acceleration_consistency(accelerations(velocities(t))) == \
        acceleration_consistency(accelerations(velocities(r)))


@SETTINGS
@given(st.floats(0, 1), st.floats(0, 1), st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_sweep_affine(va, vm, alphas):
    rows = sensitivity_sweep(ScoreBreakdown(vamp_a=va, vamp_m=vm), alphas)
    for a, v in rows:
        assert abs(v - (vm + a * (va - vm))) < 1e-12


@SETTINGS
@given(st.lists(st.floats(0, 1), min_size=3, max_size=3), st.lists(st.floats(0, 1), min_size=3, max_size=3),
       st.integers(0, 2))
def test_appearance_monotone(subs, raw_w, k):
    total = sum(raw_w)
    w = AppearanceWeights(*(x / total for x in raw_w)) if total > 0 else AppearanceWeights()
    bumped = list(subs)
    bumped[k] = min(1.0, bumped[k] + 0.1)
    assert w.combine(*bumped) >= w.combine(*subs) - 1e-15
