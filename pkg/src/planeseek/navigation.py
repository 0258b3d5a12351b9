"""Coarse-to-fine probe-pose search over a reward volume.

A pose grid spans (x, y, Rz, Rx); every valid cell (probe footprint fully on
the projected mask) gets the model's reward for its simulated slice. The
smoothed argmax gives the coarse pose; a local exhaustive re-scoring search
refines it.
"""

from __future__ import annotations

import csv
import itertools
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import (
    angle_between_deg,
    plane_from_pose,
    point_plane_distance,
    pose as make_pose,
    probe_axes,
)
from .volume import content_fractions, probe_line_valid, project_mask, slice_content_fraction, slice_many


@dataclass
class PoseGrid:
    x: np.ndarray
    y: np.ndarray
    rz: np.ndarray
    rx: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "rz", "rx"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.size == 0:
                raise ValueError(f"pose grid axis {name} is empty")
            setattr(self, name, arr)

    @classmethod
    def from_ranges(
        cls,
        x_range,
        y_range,
        x_step=3.0,
        y_step=3.0,
        rz_range=(0.0, 180.0),
        rz_step=5.0,
        rx_range=(-30.0, 30.0),
        rx_step=5.0,
    ):
        if min(x_step, y_step, rz_step, rx_step) <= 0:
            raise ValueError("grid steps must be positive")

        def axis(rng_pair, step):
            lo, hi = rng_pair
            n = int(np.floor((hi - lo) / step + 1e-9)) + 1
            return lo + step * np.arange(n)

        return cls(
            x=axis(x_range, x_step),
            y=axis(y_range, y_step),
            rz=axis(rz_range, rz_step),
            rx=axis(rx_range, rx_step),
        )

    @classmethod
    def for_volume(cls, volume, x_step=3.0, y_step=3.0, rz_step=5.0, rx_step=5.0):
        (x0, x1), (y0, y1), _ = volume.extent_mm()
        return cls.from_ranges(
            (x0, x1), (y0, y1), x_step, y_step, (0.0, 180.0), rz_step, (-30.0, 30.0), rx_step
        )

    @property
    def shape(self):
        return (len(self.x), len(self.y), len(self.rz), len(self.rx))

    def pose_at(self, ix, iy, iz, ir):
        return make_pose(
            x=self.x[ix], y=self.y[iy], rx=self.rx[ir], rz=self.rz[iz]
        )


@dataclass
class RewardVolume:
    rewards: np.ndarray  # (nx, ny, nrz, nrx); meaningless where not valid
    valid: np.ndarray  # same shape, bool
    grid: PoseGrid


def build_reward_volume(model, volume, grid, probe, chunk=256, min_content=None):
    """Score every valid pose of the grid with the reward model.

    Footprint validity only depends on (x, y, Rz), so it is evaluated once
    per horizontal pose and broadcast along the tilt axis. ``min_content``
    additionally drops poses whose simulated image would carry less than
    that fraction of in-volume samples (tilted slices can exit sideways
    even with a valid footprint).
    """
    mask = project_mask(volume)
    nx, ny, nrz, nrx = grid.shape
    valid_xyz = np.zeros((nx, ny, nrz), dtype=bool)
    for ix, iy, iz in itertools.product(range(nx), range(ny), range(nrz)):
        pose = grid.pose_at(ix, iy, iz, 0)
        valid_xyz[ix, iy, iz] = probe_line_valid(mask, pose, probe, volume)
    valid = np.broadcast_to(valid_xyz[..., None], (nx, ny, nrz, nrx)).copy()
    if min_content is not None:
        idx = np.argwhere(valid)
        for start in range(0, len(idx), chunk):
            block = idx[start : start + chunk]
            poses = np.stack([grid.pose_at(*cell) for cell in block])
            fracs = content_fractions(volume, poses, probe)
            for cell, frac in zip(block, fracs):
                if frac < min_content:
                    valid[tuple(cell)] = False
    if not valid.any():
        raise ValueError(
            "no valid probe pose on this grid: the footprint never fits the volume mask"
        )
    rewards = np.zeros(valid.shape, dtype=np.float64)
    idx = np.argwhere(valid)
    for start in range(0, len(idx), chunk):
        block = idx[start : start + chunk]
        poses = [grid.pose_at(*cell) for cell in block]
        images = slice_many(volume, poses, probe)
        scores = model.predict(images)
        rewards[tuple(block.T)] = np.asarray(scores).reshape(-1)
    return RewardVolume(rewards=rewards, valid=valid, grid=grid)


def smooth(rv, window=3, include_tilt=True):
    """Mean-filter rewards over valid neighbors; invalid cells stay invalid."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd size, got {window}")
    half = window // 2
    acc = np.zeros_like(rv.rewards)
    cnt = np.zeros_like(rv.rewards)
    vals = np.where(rv.valid, rv.rewards, 0.0)
    vmask = rv.valid.astype(np.float64)
    axes = (0, 1, 2, 3) if include_tilt else (0, 1, 2)
    offset_ranges = [
        range(-half, half + 1) if ax in axes else range(0, 1) for ax in range(4)
    ]
    for offs in itertools.product(*offset_ranges):
        src = [slice(None)] * 4
        dst = [slice(None)] * 4
        for ax, off in enumerate(offs):
            n = rv.rewards.shape[ax]
            if off >= 0:
                src[ax] = slice(0, n - off)
                dst[ax] = slice(off, n)
            else:
                src[ax] = slice(-off, n)
                dst[ax] = slice(0, n + off)
        acc[tuple(dst)] += vals[tuple(src)]
        cnt[tuple(dst)] += vmask[tuple(src)]
    out = np.zeros_like(rv.rewards)
    nonzero = cnt > 0
    out[nonzero] = acc[nonzero] / cnt[nonzero]
    out[~rv.valid] = 0.0
    return RewardVolume(rewards=out, valid=rv.valid.copy(), grid=rv.grid)


def coarse_pose(rv):
    """Argmax pose over valid cells; ties resolve to the lexicographically
    smallest (x, y, Rz, Rx) index."""
    if not rv.valid.any():
        raise ValueError("reward volume has no valid cells")
    masked = np.where(rv.valid, rv.rewards, -np.inf)
    flat = int(np.argmax(masked))  # first occurrence == lexicographic order
    cell = np.unravel_index(flat, masked.shape)
    return rv.grid.pose_at(*cell), float(masked[cell])


def fine_tune(
    model,
    volume,
    coarse,
    probe,
    span_mm=10.0,
    span_deg=10.0,
    step_mm=5.0,
    step_deg=5.0,
    min_content=None,
):
    """Exhaustive local re-scoring search around the coarse pose.

    Returns (pose, reward); the coarse pose is part of the search set so the
    result never scores below it.
    """
    mask = project_mask(volume)
    deltas_mm = np.arange(-span_mm, span_mm + 1e-9, step_mm)
    deltas_deg = np.arange(-span_deg, span_deg + 1e-9, step_deg)
    poses = []
    for dx, dy, drz, drx in itertools.product(
        deltas_mm, deltas_mm, deltas_deg, deltas_deg
    ):
        pose = np.asarray(coarse, float).copy()
        pose[0] += dx
        pose[1] += dy
        pose[5] += drz
        pose[3] += drx
        if not probe_line_valid(mask, pose, probe, volume):
            continue
        if min_content is not None and slice_content_fraction(volume, pose, probe) < min_content:
            continue
        poses.append(pose)
    if not poses:
        warnings.warn("fine search found no valid pose; returning the coarse pose")
        img = slice_many(volume, [coarse], probe)
        return np.asarray(coarse, float), float(model.predict(img)[0])
    images = slice_many(volume, poses, probe)
    scores = np.asarray(model.predict(images)).reshape(-1)
    best = int(np.argmax(scores))  # first max: smallest offsets win ties
    return poses[best], float(scores[best])


def alignment_errors(pose, spec, half_window_mm=15.0):
    """Angular and positional error of a probe pose against a phantom's
    ground truth: e_r between probe long axis and the target axis (mod 180);
    e_d as point-to-plane (blob) or centerline-to-plane (tube) distance."""
    long_axis, _ = probe_axes(pose)
    e_r = angle_between_deg(long_axis, spec.target_axis())
    origin, normal = plane_from_pose(pose)
    if spec.kind == "tube":
        p0, p1 = spec.centerline()
        e_d = _footprint_window_distance(pose, p0, p1, origin, normal, half_window_mm)
    else:
        e_d = point_plane_distance(spec.target_point(), origin, normal)
    return {"e_r_deg": float(e_r), "e_d_mm": float(e_d)}


def _footprint_window_distance(pose, p0, p1, origin, normal, half_window_mm, n_samples=201):
    """Mean line-to-plane distance over the centerline stretch facing the probe."""
    long_axis, _ = probe_axes(pose)
    ts = np.linspace(0.0, 1.0, n_samples)
    pts = p0[None, :] + ts[:, None] * (p1 - p0)[None, :]
    along = (pts - origin) @ long_axis
    window = np.abs(along) <= half_window_mm
    if not window.any():
        window[:] = True
    d = np.abs((pts[window] - origin) @ normal)
    return float(d.mean())


def export_reward_volume_csv(rv, path):
    """CSV dump: one row per cell (x, y, Rz, Rx, valid, reward)."""
    nx, ny, nrz, nrx = rv.rewards.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "rz", "rx", "valid", "reward"])
        for ix, iy, iz, ir in itertools.product(
            range(nx), range(ny), range(nrz), range(nrx)
        ):
            ok = bool(rv.valid[ix, iy, iz, ir])
            writer.writerow(
                [
                    repr(float(rv.grid.x[ix])),
                    repr(float(rv.grid.y[iy])),
                    repr(float(rv.grid.rz[iz])),
                    repr(float(rv.grid.rx[ir])),
                    int(ok),
                    repr(float(rv.rewards[ix, iy, iz, ir])) if ok else "",
                ]
            )


def navigation_summary(
    coarse, coarse_reward, fine, fine_reward, spec=None
):
    summary = {
        "coarse_pose": [float(v) for v in coarse],
        "coarse_reward": float(coarse_reward),
        "fine_pose": [float(v) for v in fine],
        "fine_reward": float(fine_reward),
    }
    if spec is not None:
        summary["errors_coarse"] = alignment_errors(coarse, spec)
        summary["errors_fine"] = alignment_errors(fine, spec)
        summary["ground_truth_pose"] = [float(v) for v in spec.standard_plane_pose()]
    return summary


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
