"""Scripted expert demonstrations on synthetic phantoms.

A demonstration is a noisy pose interpolation from a random valid start to
the phantom's ground-truth standard plane, with overshoot and wander that
die out toward the end, mimicking an exploratory human sweep. Tube targets
get their end pose slid randomly along the centerline (a "line" target has
a one-parameter family of valid stops).
"""

from __future__ import annotations

import numpy as np

from .demos import Demonstration, Frame
from .geometry import wrap_angle_deg
from .validation import check_rng
from .volume import probe_line_valid, project_mask, slice_volume


def _make_valid(pose, mask, probe, volume, center_xy, max_iter=40):
    """Pull a pose toward the volume center until its footprint is valid."""
    pose = np.asarray(pose, float).copy()
    for _ in range(max_iter):
        if probe_line_valid(mask, pose, probe, volume):
            return pose
        pose[0] += 0.15 * (center_xy[0] - pose[0])
        pose[1] += 0.15 * (center_xy[1] - pose[1])
        pose[3] *= 0.7
    raise RuntimeError("could not find a valid probe pose near the requested one")


def _random_start(spec, volume, probe, rng, mask, center_xy):
    (x0, x1), (y0, y1), _ = volume.extent_mm()
    margin = probe.width_mm / 2.0
    pose = np.zeros(6)
    pose[0] = rng.uniform(x0 + margin, x1 - margin)
    pose[1] = rng.uniform(y0 + margin, y1 - margin)
    pose[5] = rng.uniform(0.0, 180.0)
    pose[3] = rng.uniform(-20.0, 20.0)
    return _make_valid(pose, mask, probe, volume, center_xy)


def _end_pose(spec, rng, end_jitter_mm, end_jitter_deg, line_slack=0.25):
    end = spec.standard_plane_pose().copy()
    if spec.kind == "tube":
        p0, p1 = spec.centerline()
        axis = (p1 - p0) / np.linalg.norm(p1 - p0)
        slide = rng.uniform(-line_slack, line_slack) * np.linalg.norm(p1 - p0)
        end[0] += slide * axis[0]
        end[1] += slide * axis[1]
    end[0] += rng.normal(0.0, end_jitter_mm)
    end[1] += rng.normal(0.0, end_jitter_mm)
    end[5] += rng.normal(0.0, end_jitter_deg)
    end[3] += rng.normal(0.0, end_jitter_deg)
    return end


def scripted_demonstration(
    volume,
    probe,
    rng=None,
    n_frames=140,
    wander_mm=6.0,
    wander_deg=12.0,
    overshoot=0.25,
    end_jitter_mm=0.4,
    end_jitter_deg=0.8,
    source_id="scripted",
):
    """One sweep ending at (a jittered copy of) the ground-truth plane pose."""
    if volume.spec is None:
        raise ValueError("volume carries no phantom spec; cannot script a demonstration")
    rng = check_rng(rng)
    spec = volume.spec
    mask = project_mask(volume)
    center_xy = np.array(
        [np.mean(volume.extent_mm()[0]), np.mean(volume.extent_mm()[1])]
    )
    start = _random_start(spec, volume, probe, rng, mask, center_xy)
    end = _make_valid(
        _end_pose(spec, rng, end_jitter_mm, end_jitter_deg),
        mask,
        probe,
        volume,
        center_xy,
    )

    delta = end - start
    delta[3] = wrap_angle_deg(delta[3])
    delta[5] = wrap_angle_deg(delta[5])

    # wander components: a couple of random sinusoids per DoF, fading to zero
    n_waves = 3
    amp = np.zeros((6, n_waves))
    amp[0] = rng.normal(0.0, wander_mm, n_waves)
    amp[1] = rng.normal(0.0, wander_mm, n_waves)
    amp[3] = rng.normal(0.0, wander_deg, n_waves)
    amp[5] = rng.normal(0.0, wander_deg, n_waves)
    freq = rng.uniform(1.0, 3.0, n_waves)
    phase = rng.uniform(0.0, 2 * np.pi, n_waves)

    frames = []
    for i in range(n_frames):
        t = i / (n_frames - 1)
        # progress with a mid-sweep overshoot that settles by t=1
        s = t + overshoot * np.sin(np.pi * t) * (1.0 - t)
        pose = start + s * delta
        fade = (1.0 - t) ** 1.5
        for dof in (0, 1, 3, 5):
            wave = np.sum(amp[dof] * np.sin(2 * np.pi * freq * t + phase))
            pose[dof] += fade * wave
        if i == n_frames - 1:
            pose = end.copy()
        pose = _make_valid(pose, mask, probe, volume, center_xy)
        image = slice_volume(volume, pose, probe, check_valid=False)
        frames.append(Frame(image=image, pose=pose, timestamp=float(i)))
    return Demonstration(frames=frames, source_id=source_id)


def scripted_demo_set(volume, probe, n_demos=6, seed=0, **kwargs):
    rng = check_rng(seed)
    return [
        scripted_demonstration(
            volume, probe, rng=rng, source_id=f"scripted-{k}", **kwargs
        )
        for k in range(n_demos)
    ]
