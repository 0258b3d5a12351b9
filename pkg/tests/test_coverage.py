"""Coverage-path key-point planning."""

import numpy as np
import pytest

from planeseek import plan_coverage_path


def test_wide_probe_single_centered_line():
    # min edge 30 mm, probe 37.5 mm -> one line at the midpoint
    p1 = np.array([100.0, 0, 0])
    p2 = np.array([0.0, 0, 0])
    p3 = np.array([0.0, 30, 0])
    path = plan_coverage_path(p1, p2, p3, probe_width=37.5)
    assert len(path.key_points) == 1
    assert np.allclose(path.key_points[0], [0, 15, 0])
    assert np.allclose(path.sweep_vec, [100, 0, 0])


def test_multi_line_offsets():
    # min edge 100, w_p 40, eps 5 -> offsets 20, 55, 90
    p1 = np.array([0.0, 150, 0])
    p2 = np.array([0.0, 0, 0])
    p3 = np.array([100.0, 0, 0])
    path = plan_coverage_path(p1, p2, p3, probe_width=40, epsilon0=5)
    assert np.allclose(path.offsets, [20, 55, 90])
    assert np.allclose(path.key_points[1], [55, 0, 0])
    segs = path.segments()
    assert np.allclose(segs[0][1] - segs[0][0], [0, 150, 0])


def test_zero_overlap_abutting_strips():
    # eps 0 and probe dividing the edge exactly: strips abut with no overlap
    p1 = np.array([0.0, 200, 0])
    p2 = np.zeros(3)
    p3 = np.array([120.0, 0, 0])
    path = plan_coverage_path(p1, p2, p3, probe_width=40, epsilon0=0)
    assert np.allclose(path.offsets, [20, 60, 100])
    edges = [(o - 20, o + 20) for o in path.offsets]
    for (a0, a1), (b0, b1) in zip(edges, edges[1:]):
        assert a1 == pytest.approx(b0)


def test_strip_union_covers_interior_with_overlap():
    p1 = np.array([0.0, 97, 0])
    p2 = np.zeros(3)
    p3 = np.array([64.0, 0, 0])
    w = 17.0
    eps = 2.5
    path = plan_coverage_path(p1, p2, p3, probe_width=w, epsilon0=eps)
    samples = np.linspace(0.0, 64.0, 500)
    covered = np.zeros_like(samples, dtype=bool)
    for off in path.offsets:
        covered |= np.abs(samples - off) <= w / 2
    assert covered.all()


def test_collinear_corners_rejected():
    with pytest.raises(ValueError):
        plan_coverage_path([0, 0, 0], [1, 1, 1], [2, 2, 2], probe_width=10)
    with pytest.raises(ValueError):
        plan_coverage_path([1, 0, 0], [0, 0, 0], [2, 0, 0], probe_width=10)


def test_pose6_inputs_accepted():
    path = plan_coverage_path(
        np.array([50.0, 0, 0, 0, 0, 0]),
        np.array([0.0, 0, 0, 0, 0, 0]),
        np.array([0.0, 20, 0, 0, 0, 0]),
        probe_width=25,
    )
    assert len(path.key_points) == 1
