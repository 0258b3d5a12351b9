"""Demonstration containers, downsampling, and the end-pose confidence filter."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .stats import chi2_ppf, chi2_sf
from .validation import check_pose

VARIANCE_FLOOR = 1e-8


@dataclass
class Frame:
    image: np.ndarray  # (H, W) in [0, 1]
    pose: np.ndarray  # (x, y, z, Rx, Ry, Rz)
    timestamp: float

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.float64)
        self.pose = check_pose(self.pose)
        self.timestamp = float(self.timestamp)


@dataclass
class Demonstration:
    frames: list
    source_id: str = ""
    confidence: float | None = None
    mahalanobis: float | None = None

    def __post_init__(self):
        if len(self.frames) < 2:
            raise ValueError(
                f"demonstration {self.source_id!r} needs at least 2 frames, "
                f"got {len(self.frames)}"
            )
        ts = [f.timestamp for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(
                f"demonstration {self.source_id!r} timestamps must strictly increase"
            )

    def __len__(self):
        return len(self.frames)

    @property
    def end_frame(self):
        return self.frames[-1]

    @property
    def end_pose(self):
        return self.frames[-1].pose

    def poses(self):
        return np.stack([f.pose for f in self.frames])

    def images(self):
        return np.stack([f.image for f in self.frames])

    def timestamps(self):
        return np.array([f.timestamp for f in self.frames])


def downsample(demo, n=100):
    """Reduce a demonstration to ``n`` frames at uniform index stride.

    The first frame is always kept and the final frame always replaces the
    last strided index, so both endpoints survive. Short demonstrations are
    returned unchanged with a warning.
    """
    m = len(demo)
    if m < n:
        warnings.warn(
            f"demonstration {demo.source_id!r} has {m} < {n} frames; keeping all"
        )
        return demo
    stride = m // n
    idx = [i * stride for i in range(n)]
    idx[-1] = m - 1
    return Demonstration(
        frames=[demo.frames[i] for i in idx],
        source_id=demo.source_id,
        confidence=demo.confidence,
        mahalanobis=demo.mahalanobis,
    )


@dataclass
class EndPoseModel:
    """Gaussian over per-DoF min-max normalized ending poses."""

    mu: np.ndarray  # (6,) in normalized units
    sigma: np.ndarray  # (6, 6)
    mins: np.ndarray  # (6,) normalization offsets
    ranges: np.ndarray  # (6,) normalization scales (1 where degenerate)
    n_dof: int = 6
    _precision: np.ndarray | None = field(default=None, repr=False)

    def normalize(self, pose):
        pose = check_pose(pose)
        return (pose - self.mins) / self.ranges

    def precision(self):
        if self._precision is None:
            try:
                self._precision = np.linalg.inv(self.sigma)
            except np.linalg.LinAlgError:
                warnings.warn("singular end-pose covariance; regularizing with eps*I")
                self._precision = np.linalg.inv(
                    self.sigma + VARIANCE_FLOOR * np.eye(self.n_dof)
                )
        return self._precision

    def mahalanobis_sq(self, pose):
        d = self.normalize(pose) - self.mu
        return float(d @ self.precision() @ d)


def fit_end_pose_model(demos):
    """Maximum-likelihood Gaussian over the demonstrations' normalized end poses."""
    if len(demos) < 2:
        raise ValueError(f"need at least 2 demonstrations, got {len(demos)}")
    ends = np.stack([d.end_pose for d in demos])
    mins = ends.min(axis=0)
    spans = ends.max(axis=0) - mins
    ranges = np.where(spans > 0, spans, 1.0)
    normed = (ends - mins) / ranges
    mu = normed.mean(axis=0)
    centered = normed - mu
    sigma = centered.T @ centered / len(demos)
    # degenerate DoFs get a variance floor instead of dimension reduction
    diag = np.diag(sigma).copy()
    floor_idx = diag < VARIANCE_FLOOR
    sigma[floor_idx, floor_idx] = VARIANCE_FLOOR
    return EndPoseModel(mu=mu, sigma=sigma, mins=mins, ranges=ranges)


def filter_demos(demos, model=None, p_ci=0.95):
    """Split demonstrations into (kept, rejected) by the chi-squared gate.

    A demonstration is kept iff its normalized end pose falls inside the
    p_ci confidence ellipsoid of the end-pose Gaussian. Every demonstration
    gets its Mahalanobis statistic and a survival-probability confidence.
    """
    if model is None:
        model = fit_end_pose_model(demos)
    threshold = chi2_ppf(p_ci, model.n_dof)
    kept, rejected = [], []
    for demo in demos:
        stat = model.mahalanobis_sq(demo.end_pose)
        demo.mahalanobis = stat
        demo.confidence = chi2_sf(stat, model.n_dof)
        (kept if stat <= threshold else rejected).append(demo)
    return kept, rejected


def filter_threshold(p_ci=0.95, n_dof=6):
    return chi2_ppf(p_ci, n_dof)
