import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planeseek.geometry import (
    angle_between_deg,
    plane_from_pose,
    point_plane_distance,
    pose,
    probe_axes,
    rotate_xy,
    segment_plane_distance,
    wrap_angle_deg,
)


def test_wrap_examples():
    assert wrap_angle_deg(358.0) == pytest.approx(-2.0)
    assert wrap_angle_deg(-358.0) == pytest.approx(2.0)
    assert wrap_angle_deg(180.0) == pytest.approx(180.0)
    assert wrap_angle_deg(-180.0) == pytest.approx(180.0)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-1e4, 1e4))
def test_wrap_range_and_equivalence(a):
    w = wrap_angle_deg(a)
    assert -180.0 < w <= 180.0
    assert (w - a) % 360.0 == pytest.approx(0.0, abs=1e-6) or (w - a) % 360.0 == pytest.approx(360.0, abs=1e-6)


def test_probe_axes_plain():
    long_axis, down = probe_axes(pose(rz=0.0, rx=0.0))
    assert np.allclose(long_axis, [1, 0, 0])
    assert np.allclose(down, [0, 0, 1])
    # tilt about the long axis moves the down vector in the y-z plane
    _, down_t = probe_axes(pose(rz=0.0, rx=30.0))
    assert down_t[0] == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(down_t) == pytest.approx(1.0)


def test_plane_contains_footprint():
    p = pose(x=3, y=4, rz=30.0, rx=10.0)
    origin, normal = plane_from_pose(p)
    long_axis, down = probe_axes(p)
    assert abs(normal @ long_axis) < 1e-12
    assert abs(normal @ down) < 1e-12
    assert point_plane_distance(origin + 5 * long_axis, origin, normal) < 1e-12


def test_angle_between_mod_180():
    assert angle_between_deg([1, 0, 0], [-1, 0, 0]) == pytest.approx(0.0)
    assert angle_between_deg([1, 0, 0], [0, 1, 0]) == pytest.approx(90.0)
    assert angle_between_deg([1, 0, 0], [1, 1, 0]) == pytest.approx(45.0)


def test_segment_plane_distance():
    origin, normal = np.zeros(3), np.array([0.0, 0, 1])
    a, b = np.array([0.0, 0, 2]), np.array([1.0, 0, 2])
    assert segment_plane_distance(a, b, origin, normal) == pytest.approx(2.0)
    # crossing segment: mean of |z| over samples
    a, b = np.array([0.0, 0, -1]), np.array([0.0, 0, 1])
    assert segment_plane_distance(a, b, origin, normal, n_samples=101) == pytest.approx(0.5, abs=0.02)


def test_rotate_xy_about_center():
    out = rotate_xy(np.array([2.0, 0.0]), 90.0, center=(1.0, 0.0))
    assert np.allclose(out, [1.0, 1.0])
    pts = rotate_xy(np.array([[2.0, 0.0], [0.0, 0.0]]), 180.0, center=(1.0, 0.0))
    assert np.allclose(pts, [[0.0, 0.0], [2.0, 0.0]])


def test_short_axis_rotation_pivots_in_plane():
    base_long, base_down = probe_axes(pose(rz=0.0, rx=0.0, ry=0.0))
    long90, down90 = probe_axes(pose(rz=0.0, rx=0.0, ry=90.0))
    # plane normal unchanged; long axis rotates onto the old down axis
    n0 = np.cross(base_long, base_down)
    n1 = np.cross(long90, down90)
    assert np.allclose(n0, n1, atol=1e-12)
    assert np.allclose(long90, base_down, atol=1e-12)
