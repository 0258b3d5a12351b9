"""Multi-line coverage-path planning over an operator-defined parallelogram.

Three corner points (shared corner second) define the region; sweep lines
run parallel to the longer edge and are spaced along the shorter edge so
consecutive probe strips overlap by ``epsilon0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class CoveragePath:
    key_points: np.ndarray  # (n, 3) line anchor points on the short axis
    sweep_vec: np.ndarray  # (3,) full-length vector along the longer edge
    short_unit: np.ndarray  # (3,) unit vector along the shorter edge
    offsets: np.ndarray  # (n,) mm offsets of each line along the short axis

    def segments(self):
        """Sweep segments [(start, end)] for each planned line."""
        return [(kp.copy(), kp + self.sweep_vec) for kp in self.key_points]


def plan_coverage_path(p1, p2, p3, probe_width, epsilon0=0.0):
    """Plan sweep-line key points covering the parallelogram (p1, p2, p3).

    p2 is the shared corner. If the probe footprint is at least as wide as
    the shorter edge a single centered line suffices; otherwise lines sit at
    (1/2 + j) * w_p - j * epsilon0 along the shorter edge for
    j = 0 .. ceil(short_edge / w_p) - 1.
    """
    p1 = np.asarray(p1, float)[:3]
    p2 = np.asarray(p2, float)[:3]
    p3 = np.asarray(p3, float)[:3]
    if probe_width <= 0:
        raise ValueError("probe_width must be positive")
    e1 = p1 - p2
    e3 = p3 - p2
    if np.linalg.norm(np.cross(e1, e3)) < 1e-9:
        raise ValueError("corner points are collinear; they do not span a parallelogram")
    len1 = np.linalg.norm(e1)
    len3 = np.linalg.norm(e3)
    if len1 >= len3:
        long_vec, short_vec, short_len = e1, e3, len3
    else:
        long_vec, short_vec, short_len = e3, e1, len1
    short_unit = short_vec / short_len

    if probe_width >= short_len:
        offsets = np.array([short_len / 2.0])
    else:
        n_lines = math.ceil(short_len / probe_width)
        # the overlap shifts lines backward; extend the count when the last
        # strip would fall short of the far edge
        while (0.5 + n_lines - 1) * probe_width - (n_lines - 1) * epsilon0 + probe_width / 2.0 < short_len:
            n_lines += 1
        j = np.arange(n_lines)
        offsets = (0.5 + j) * probe_width - j * epsilon0
    key_points = p2[None, :] + offsets[:, None] * short_unit[None, :]
    return CoveragePath(
        key_points=key_points,
        sweep_vec=long_vec,
        short_unit=short_unit,
        offsets=offsets,
    )
