"""6-DoF pose conventions and probe-plane geometry.

A pose is a length-6 array (x, y, z, Rx, Ry, Rz): millimetre translations
followed by intrinsic Euler rotations in degrees. The virtual probe is
controlled in four of these (x, y, Rz, Rx): the footprint line sits on the
volume's top surface at (x, y) with in-plane heading Rz, and the imaging
plane hangs downward, tilted by Rx about the footprint (probe long) axis.
"""

from __future__ import annotations

import numpy as np

TRANSLATION_IDX = (0, 1, 2)
ROTATION_IDX = (3, 4, 5)


def pose(x=0.0, y=0.0, z=0.0, rx=0.0, ry=0.0, rz=0.0):
    return np.array([x, y, z, rx, ry, rz], dtype=np.float64)


def wrap_angle_deg(a):
    """Wrap angle difference(s) into (-180, 180]."""
    a = np.asarray(a, dtype=np.float64)
    wrapped = -((-a + 180.0) % 360.0 - 180.0)
    return wrapped if wrapped.shape else float(wrapped)


def angle_between_deg(u, v, period=180.0):
    """Unsigned angle between two directions, folded modulo ``period``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    cosang = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    ang = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
    if period == 180.0 and ang > 90.0:
        ang = 180.0 - ang
    return float(ang)


def _rodrigues(v, axis, angle_rad):
    return (
        v * np.cos(angle_rad)
        + np.cross(axis, v) * np.sin(angle_rad)
        + axis * np.dot(axis, v) * (1.0 - np.cos(angle_rad))
    )


def probe_axes(p):
    """Return (long_axis, down_axis) unit vectors for a probe pose.

    long_axis: footprint direction in the horizontal plane, set by Rz.
    down_axis: image depth direction, +z rotated by Rx about the long axis.
    Ry (rotation about the probe short axis, i.e. the plane normal) pivots
    both axes within the imaging plane; the pose search never varies it but
    the slicer honors it.
    """
    p = np.asarray(p, dtype=np.float64)
    rz = np.radians(p[5])
    rx = np.radians(p[3])
    long_axis = np.array([np.cos(rz), np.sin(rz), 0.0])
    z = np.array([0.0, 0.0, 1.0])
    down = _rodrigues(z, long_axis, rx)
    ry = p[4]
    if ry != 0.0:
        normal = np.cross(long_axis, down)
        long_axis = _rodrigues(long_axis, normal, np.radians(ry))
        down = _rodrigues(down, normal, np.radians(ry))
    return long_axis, down


def plane_from_pose(p):
    """Imaging plane of a probe pose as (point_on_plane, unit_normal)."""
    p = np.asarray(p, dtype=np.float64)
    long_axis, down = probe_axes(p)
    normal = np.cross(long_axis, down)
    normal /= np.linalg.norm(normal)
    origin = np.array([p[0], p[1], p[2]])
    return origin, normal


def point_plane_distance(point, plane_point, plane_normal):
    return float(abs(np.dot(np.asarray(point, float) - plane_point, plane_normal)))


def segment_plane_distance(a, b, plane_point, plane_normal, n_samples=11):
    """Mean unsigned distance from a segment to a plane, sampled uniformly."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ts = np.linspace(0.0, 1.0, n_samples)
    pts = a[None, :] + ts[:, None] * (b - a)[None, :]
    d = np.abs((pts - plane_point) @ plane_normal)
    return float(d.mean())


def rotate_xy(points, angle_deg, center):
    """Rotate (n, 2) or (2,) horizontal coordinates about ``center``."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    c = np.asarray(center, dtype=np.float64)
    ang = np.radians(angle_deg)
    rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    out = (pts - c) @ rot.T + c
    return out[0] if np.asarray(points).ndim == 1 else out
