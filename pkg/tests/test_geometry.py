import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spikelab import geometry as geo
from spikelab.errors import PointNotOnBoundary


def test_ball_level_and_contains():
    d = geo.ball(2.0, 3)
    assert d.contains(np.array([0.0, 0.0, 0.0]))
    assert d.contains(np.array([1.9, 0.0, 0.0]))
    assert not d.contains(np.array([2.1, 0.0, 0.0]))


def test_invalid_shapes():
    with pytest.raises(ValueError):
        geo.ball(-1.0)
    with pytest.raises(ValueError):
        geo.ellipse(2.0, -1.0)
    with pytest.raises(ValueError):
        geo.perturbed_disk(1.0, 0.5, 3)  # amp beyond 1/(1+k^2)


def test_perturbed_disk_spec_example_admissible():
    # amplitude exactly at the convexity limit must be accepted
    d = geo.perturbed_disk(1.0, 0.1, 3)
    assert d.shape == "perturbed_disk"


@given(st.floats(min_value=0.0, max_value=2.0 * math.pi))
@settings(max_examples=40, deadline=None)
def test_boundary_point_on_level_set_ellipse(theta):
    d = geo.ellipse(2.0, 1.0)
    x = d.boundary_point(theta)
    assert abs(d.level(x)) < 1e-10


@given(st.floats(min_value=0.0, max_value=2.0 * math.pi),
       st.floats(min_value=0.01, max_value=math.pi - 0.01))
@settings(max_examples=40, deadline=None)
def test_outward_normal_is_unit_ellipsoid(theta, phi):
    d = geo.ellipsoid(1.6, 1.0, 1.0)
    x = d.boundary_point(theta, phi)
    n = d.outward_normal(x)
    assert np.linalg.norm(n) == pytest.approx(1.0, abs=1e-12)
    # pointing outward: moving along n increases the level function
    assert d.level(x + 1e-6 * n) > d.level(x)


def test_mean_curvature_ball():
    for R in (0.5, 1.0, 3.0):
        d2 = geo.ball(R, 2)
        d3 = geo.ball(R, 3)
        p2 = d2.boundary_point(0.7)
        p3 = d3.boundary_point(0.3, 1.1)
        assert geo.mean_curvature(d2, p2) == pytest.approx(1.0 / R, rel=1e-10)
        assert geo.mean_curvature(d3, p3) == pytest.approx(1.0 / R, rel=1e-10)


def test_mean_curvature_requires_boundary_point():
    d = geo.ball(1.0, 2)
    with pytest.raises(PointNotOnBoundary):
        geo.mean_curvature(d, np.array([0.5, 0.0]))


def test_ellipse_curvature_at_vertices():
    d = geo.ellipse(2.0, 1.0)
    # curvature a/b^2 at the major-axis vertex, b/a^2 at the minor
    assert geo.mean_curvature(d, np.array([2.0, 0.0])) == pytest.approx(2.0)
    assert geo.mean_curvature(d, np.array([0.0, 1.0])) == pytest.approx(0.25)


def test_max_mean_curvature_ellipse():
    res = geo.max_mean_curvature(geo.ellipse(2.0, 1.0))
    assert res.H_max == pytest.approx(2.0, rel=1e-8)
    pts = sorted(tuple(np.round(p, 6)) for p in res.points)
    assert pts == [(-2.0, 0.0), (2.0, 0.0)]
    assert not res.degenerate


def test_max_mean_curvature_ball_degenerate():
    res = geo.max_mean_curvature(geo.ball(1.0, 2))
    assert res.degenerate
    assert "constant curvature" in res.note
    assert res.H_max == pytest.approx(1.0)


def test_max_mean_curvature_perturbed_disk_orbit():
    res = geo.max_mean_curvature(geo.perturbed_disk(1.0, 0.1, 3))
    assert len(res.points) == 3
    angles = sorted(math.atan2(p[1], p[0]) % (2 * math.pi)
                    for p in res.points)
    gaps = np.diff(angles + [angles[0] + 2 * math.pi])
    np.testing.assert_allclose(gaps, 2 * math.pi / 3, atol=1e-6)


def test_max_mean_curvature_ellipsoid():
    res = geo.max_mean_curvature(geo.ellipsoid(1.6, 1.0, 1.0))
    # mean of the two principal curvatures at the long-axis tips: a/b^2
    assert res.H_max == pytest.approx(1.6, rel=1e-6)
    for p in res.points:
        assert abs(abs(p[0]) - 1.6) < 1e-6


def test_nearest_boundary_point_ball():
    d = geo.ball(1.0, 2)
    res = geo.nearest_boundary_point(d, np.array([0.5, 0.0]))
    np.testing.assert_allclose(res.point, [1.0, 0.0], atol=1e-12)
    assert res.distance == pytest.approx(0.5)
    assert not res.tie
    assert geo.nearest_boundary_point(d, np.zeros(2)).tie


def test_nearest_boundary_point_ellipse():
    d = geo.ellipse(2.0, 1.0)
    res = geo.nearest_boundary_point(d, np.array([1.9, 0.0]))
    np.testing.assert_allclose(res.point, [2.0, 0.0], atol=1e-8)
    assert res.distance == pytest.approx(0.1, abs=1e-8)


def test_min_feature_admits_criterion_meshes():
    assert geo.ellipsoid(1.6, 1.0, 1.0).min_feature() / 4.0 >= 0.2
    assert geo.ellipse(2.0, 1.0).min_feature() / 4.0 >= 0.5 / 3.0
