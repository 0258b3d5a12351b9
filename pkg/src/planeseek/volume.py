"""Synthetic 3D phantom volumes and the virtual probe slicer.

Volumes are axis-aligned scalar fields: index (i, j, k) sits at position
origin + (i, j, k) * spacing, with k the depth axis (z, pointing down).
A phantom is procedural texture plus one embedded object (a dark tube or
blob) whose ground-truth standard plane is known in closed form.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .geometry import pose as make_pose
from .geometry import rotate_xy


@dataclass(frozen=True)
class ProbeSpec:
    """Virtual probe: footprint width, imaging depth, and image resolution."""

    width_mm: float = 30.0
    depth_mm: float = 30.0
    width_px: int = 32
    depth_px: int = 32

    def __post_init__(self):
        if self.width_mm <= 0 or self.depth_mm <= 0:
            raise ValueError("probe footprint and depth must be positive")
        if self.width_px < 2 or self.depth_px < 2:
            raise ValueError("probe image resolution must be at least 2x2")

    @property
    def resolution(self):
        return (self.depth_px, self.width_px)


@dataclass
class PhantomSpec:
    """Geometry + style of a synthetic phantom.

    kind "tube": dark cylinder from p0 to p1 with given radius (a "line"
    target: any plane containing the centerline is standard).
    kind "blob": dark ellipsoid with distinct semi-axes, long axis horizontal
    at ``yaw_deg`` (a "point" target: the unique centered long-axis section).
    Style parameters shape the background texture only; they never move the
    geometry or the ground-truth pose.
    """

    kind: str
    p0: tuple = (12.0, 32.0, 36.0)
    p1: tuple = (52.0, 32.0, 36.0)
    radius: float = 5.0
    center: tuple = (32.0, 32.0, 24.0)
    semi_axes: tuple = (14.0, 7.0, 5.0)
    yaw_deg: float = 0.0
    texture_seed: int = 0
    base_brightness: float = 0.55
    noise_level: float = 0.05
    speckle_density: float = 0.02
    contrast: float = 0.45

    def __post_init__(self):
        if self.kind not in ("tube", "blob"):
            raise ValueError(f"unknown phantom kind {self.kind!r}")

    def standard_plane_pose(self):
        """Ground-truth probe pose of the standard plane (z at the top surface)."""
        if self.kind == "tube":
            p0 = np.asarray(self.p0, float)
            p1 = np.asarray(self.p1, float)
            mid = 0.5 * (p0 + p1)
            d = p1 - p0
            rz = np.degrees(np.arctan2(d[1], d[0])) % 180.0
            return make_pose(x=mid[0], y=mid[1], z=0.0, rz=rz)
        c = np.asarray(self.center, float)
        return make_pose(x=c[0], y=c[1], z=0.0, rz=self.yaw_deg % 180.0)

    def target_axis(self):
        """Horizontal direction of the standard plane (probe long axis at GT)."""
        if self.kind == "tube":
            d = np.asarray(self.p1, float) - np.asarray(self.p0, float)
            return d / np.linalg.norm(d)
        ang = np.radians(self.yaw_deg)
        return np.array([np.cos(ang), np.sin(ang), 0.0])

    def target_point(self):
        if self.kind == "tube":
            return 0.5 * (np.asarray(self.p0, float) + np.asarray(self.p1, float))
        return np.asarray(self.center, float)

    def centerline(self):
        if self.kind != "tube":
            raise ValueError("centerline is only defined for tube phantoms")
        return np.asarray(self.p0, float), np.asarray(self.p1, float)

    def rotated(self, angle_deg, pivot_xy=None):
        """Same phantom with geometry rotated about a vertical axis."""
        if pivot_xy is None:
            pivot_xy = self.target_point()[:2]
        if self.kind == "tube":
            p0 = np.asarray(self.p0, float).copy()
            p1 = np.asarray(self.p1, float).copy()
            p0[:2] = rotate_xy(p0[:2], angle_deg, pivot_xy)
            p1[:2] = rotate_xy(p1[:2], angle_deg, pivot_xy)
            return dataclasses.replace(self, p0=tuple(p0), p1=tuple(p1))
        c = np.asarray(self.center, float).copy()
        c[:2] = rotate_xy(c[:2], angle_deg, pivot_xy)
        return dataclasses.replace(
            self, center=tuple(c), yaw_deg=(self.yaw_deg + angle_deg) % 360.0
        )

    def restyled(self, **style):
        """Same geometry, different style (texture/brightness) parameters."""
        allowed = {
            "texture_seed",
            "base_brightness",
            "noise_level",
            "speckle_density",
            "contrast",
        }
        bad = set(style) - allowed
        if bad:
            raise ValueError(f"not style parameters: {sorted(bad)}")
        return dataclasses.replace(self, **style)


@dataclass
class Volume:
    """3D scalar field with per-axis mm spacing and a world origin."""

    voxels: np.ndarray
    spacing: tuple = (1.0, 1.0, 1.0)
    origin: tuple = (0.0, 0.0, 0.0)
    spec: PhantomSpec | None = None

    def __post_init__(self):
        self.voxels = np.asarray(self.voxels, dtype=np.float64)
        if self.voxels.ndim != 3:
            raise ValueError(f"volume must be 3D, got shape {self.voxels.shape}")
        if any(s <= 0 for s in self.spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.voxels.min() < 0.0 or self.voxels.max() > 1.0:
            raise ValueError("volume intensities must lie in [0, 1]")

    @property
    def dims(self):
        return self.voxels.shape

    def extent_mm(self):
        """World-coordinate bounds [(x0,x1),(y0,y1),(z0,z1)] of the voxel nodes."""
        o = np.asarray(self.origin, float)
        hi = o + (np.asarray(self.dims) - 1) * np.asarray(self.spacing, float)
        return [(o[i], hi[i]) for i in range(3)]


def synth_volume(spec, dims=(64, 64, 48), spacing=(1.0, 1.0, 1.0), pad=0):
    """Deterministically synthesize a textured phantom volume from its spec.

    ``pad`` voxels around the textured block are exact zeros, emulating the
    empty regions a compounded sweep leaves behind (they shrink the
    projected mask).
    """
    dims = tuple(int(d) for d in dims)
    if min(dims) < 32:
        raise ValueError(f"volume dims must be at least 32 per axis, got {dims}")
    spacing = tuple(float(s) for s in spacing)
    rng = np.random.default_rng(spec.texture_seed)
    nx, ny, nz = dims

    base = rng.normal(0.0, 1.0, dims)
    # cheap large-scale smoothing: average of shifted copies, two passes
    smooth = base
    for _ in range(2):
        acc = np.zeros_like(smooth)
        for ax in range(3):
            acc += np.roll(smooth, 1, axis=ax) + np.roll(smooth, -1, axis=ax)
        smooth = (acc + smooth) / 7.0
    tex = spec.base_brightness + spec.noise_level * 3.0 * smooth
    tex += spec.noise_level * rng.normal(0.0, 1.0, dims)

    n_speckle = int(spec.speckle_density * base.size)
    if n_speckle > 0:
        flat_idx = rng.choice(base.size, size=n_speckle, replace=False)
        np.put(tex, flat_idx, tex.ravel()[flat_idx] + 0.35)

    ii, jj, kk = np.meshgrid(
        np.arange(nx) * spacing[0],
        np.arange(ny) * spacing[1],
        np.arange(nz) * spacing[2],
        indexing="ij",
    )
    pts = np.stack([ii, jj, kk], axis=-1)
    lo = np.zeros(3)
    hi = (np.asarray(dims) - 1) * np.asarray(spacing)

    if spec.kind == "tube":
        p0 = np.asarray(spec.p0, float)
        p1 = np.asarray(spec.p1, float)
        for p in (p0, p1):
            if np.any(p - spec.radius < lo) or np.any(p + spec.radius > hi):
                raise ValueError("tube geometry extends outside the volume bounds")
        axis = p1 - p0
        t = np.clip(((pts - p0) @ axis) / (axis @ axis), 0.0, 1.0)
        nearest = p0[None, None, None, :] + t[..., None] * axis[None, None, None, :]
        dist = np.linalg.norm(pts - nearest, axis=-1)
        inside = np.clip((spec.radius - dist) / max(spacing[0], 1e-9) + 0.5, 0.0, 1.0)
    else:
        c = np.asarray(spec.center, float)
        a, b, cz = spec.semi_axes
        reach = max(spec.semi_axes)
        if np.any(c - reach < lo) or np.any(c + reach > hi):
            raise ValueError("blob geometry extends outside the volume bounds")
        rel = pts - c
        relx = rotate_xy(rel[..., :2].reshape(-1, 2), -spec.yaw_deg, (0.0, 0.0)).reshape(
            rel[..., :2].shape
        )
        rho = np.sqrt(
            (relx[..., 0] / a) ** 2 + (relx[..., 1] / b) ** 2 + (rel[..., 2] / cz) ** 2
        )
        # soft shell roughly one voxel wide at the surface
        edge = min(spacing) / min(spec.semi_axes)
        inside = np.clip((1.0 - rho) / max(edge, 1e-9) + 0.5, 0.0, 1.0)

    obj_brightness = np.clip(spec.base_brightness - spec.contrast, 0.02, 1.0)
    vox = tex * (1.0 - inside) + obj_brightness * inside
    vox = np.clip(vox, 0.01, 1.0)

    origin = (0.0, 0.0, 0.0)
    if pad > 0:
        padded = np.zeros((nx + 2 * pad, ny + 2 * pad, nz), dtype=np.float64)
        padded[pad:-pad, pad:-pad, :] = vox
        vox = padded
        # keep the textured block at its original world coordinates
        origin = (-pad * spacing[0], -pad * spacing[1], 0.0)
    return Volume(vox, spacing=spacing, origin=origin, spec=spec)


def project_mask(volume):
    """2D occupancy of the volume seen from above: 1 where any voxel has data."""
    return (volume.voxels > 0.0).any(axis=2)


def _to_cell(p_xy, volume):
    o = np.asarray(volume.origin[:2], float)
    s = np.asarray(volume.spacing[:2], float)
    return (np.asarray(p_xy, float) - o) / s


def footprint_endpoints(pose, probe):
    rz = np.radians(pose[5])
    d = np.array([np.cos(rz), np.sin(rz)])
    c = np.asarray(pose[:2], float)
    half = 0.5 * probe.width_mm
    return c - half * d, c + half * d


def raster_line_cells(a, b):
    """All integer cells a segment passes through (Amanatides-Woo traversal).

    Cells are unit squares centered on integer coordinates: cell (i, j)
    covers [i-1/2, i+1/2) x [j-1/2, j+1/2).
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    cell = np.floor(a + 0.5).astype(int)
    end_cell = np.floor(b + 0.5).astype(int)
    cells = [tuple(cell)]
    d = b - a
    step = np.sign(d).astype(int)
    t_max = np.empty(2)
    t_delta = np.empty(2)
    for ax in range(2):
        if d[ax] == 0:
            t_max[ax] = np.inf
            t_delta[ax] = np.inf
        else:
            boundary = cell[ax] + (0.5 if step[ax] > 0 else -0.5)
            t_max[ax] = (boundary - a[ax]) / d[ax]
            t_delta[ax] = abs(1.0 / d[ax])
    guard = 0
    while tuple(cell) != tuple(end_cell):
        ax = 0 if t_max[0] <= t_max[1] else 1
        cell[ax] += step[ax]
        t_max[ax] += t_delta[ax]
        cells.append(tuple(cell))
        guard += 1
        if guard > 100000:
            raise RuntimeError("line rasterization did not terminate")
    return cells


def probe_line_valid(mask, pose, probe, volume):
    """True iff every cell under the probe footprint line carries data."""
    a, b = footprint_endpoints(pose, probe)
    a = _to_cell(a, volume)
    b = _to_cell(b, volume)
    nx, ny = mask.shape
    for i, j in raster_line_cells(a, b):
        if i < 0 or j < 0 or i >= nx or j >= ny:
            return False
        if not mask[i, j]:
            return False
    return True


def _trilinear(voxels, pts):
    """Sample node-centered voxels at fractional index coordinates; outside -> 0.

    grid-constant padding makes samples interpolate toward zero across the
    boundary and read exactly zero beyond it.
    """
    f = np.asarray(pts, dtype=np.float64)
    coords = f.reshape(-1, 3).T
    out = map_coordinates(voxels, coords, order=1, mode="grid-constant", cval=0.0)
    return out.reshape(f.shape[:-1])


def _plane_points(pose, probe):
    """World coordinates of every pixel center on the imaging rectangle."""
    from .geometry import probe_axes

    pose = np.asarray(pose, float)
    long_axis, down = probe_axes(pose)
    u = (np.arange(probe.width_px) + 0.5) / probe.width_px - 0.5
    u = u * probe.width_mm
    v = (np.arange(probe.depth_px) + 0.5) / probe.depth_px * probe.depth_mm
    origin = pose[:3]
    return (
        origin[None, None, :]
        + v[:, None, None] * down[None, None, :]
        + u[None, :, None] * long_axis[None, None, :]
    )


def slice_volume(volume, pose, probe, check_valid=True, mask=None):
    """Sample the probe's imaging rectangle from the volume (trilinear).

    Rows run along depth, columns along the footprint; samples outside the
    volume read zero.
    """
    pose = np.asarray(pose, float)
    if check_valid:
        if mask is None:
            mask = project_mask(volume)
        if not probe_line_valid(mask, pose, probe, volume):
            raise ValueError(
                "invalid probe pose: footprint line leaves the projected volume "
                "mask (probe-line validity test)"
            )
    pts = _plane_points(pose, probe)
    f = (pts - np.asarray(volume.origin, float)) / np.asarray(volume.spacing, float)
    return _trilinear(volume.voxels, f)


def _plane_points_batch(poses, probe):
    """Vectorized pixel-center coordinates for (n, 6) poses without Ry."""
    poses = np.asarray(poses, float)
    rz = np.radians(poses[:, 5])
    rx = np.radians(poses[:, 3])
    long_axis = np.stack([np.cos(rz), np.sin(rz), np.zeros_like(rz)], axis=1)
    z = np.array([0.0, 0.0, 1.0])
    down = z[None, :] * np.cos(rx)[:, None] + np.cross(long_axis, z[None, :]) * np.sin(rx)[:, None]
    u = ((np.arange(probe.width_px) + 0.5) / probe.width_px - 0.5) * probe.width_mm
    v = (np.arange(probe.depth_px) + 0.5) / probe.depth_px * probe.depth_mm
    return (
        poses[:, None, None, :3]
        + v[None, :, None, None] * down[:, None, None, :]
        + u[None, None, :, None] * long_axis[:, None, None, :]
    )


def _batch_points(poses, probe):
    poses = np.asarray(poses, float)
    if poses.ndim == 1:
        poses = poses[None]
    if np.any(poses[:, 4] != 0.0):
        return np.stack([_plane_points(p, probe) for p in poses])
    return _plane_points_batch(poses, probe)


def slice_many(volume, poses, probe):
    """Slice a batch of poses at once; returns (n, depth_px, width_px)."""
    if len(poses) == 0:
        return np.zeros((0, probe.depth_px, probe.width_px))
    pts = _batch_points(poses, probe)
    f = (pts - np.asarray(volume.origin, float)) / np.asarray(volume.spacing, float)
    return _trilinear(volume.voxels, f)


def content_fractions(volume, poses, probe):
    """Per-pose fraction of imaging-rectangle pixel centers inside the volume.

    Tilted slices can leave the volume sideways even when the footprint line
    is valid; this quantifies how much of each simulated image carries real
    content.
    """
    pts = _batch_points(poses, probe)
    f = (pts - np.asarray(volume.origin, float)) / np.asarray(volume.spacing, float)
    hi = np.asarray(volume.dims) - 1
    inside = np.all((f >= 0) & (f <= hi), axis=-1)
    return inside.mean(axis=(1, 2))


def slice_content_fraction(volume, pose, probe):
    """Single-pose convenience wrapper around ``content_fractions``."""
    return float(content_fractions(volume, np.asarray(pose, float)[None], probe)[0])


VOLUME_MAGIC = b"PSVOL1\n"


def save_volume(path, volume):
    """Volume file: JSON header line + raw little-endian float32 voxels."""
    header = {
        "dims": list(volume.dims),
        "spacing": list(volume.spacing),
        "origin": list(volume.origin),
        "spec": dataclasses.asdict(volume.spec) if volume.spec else None,
    }
    with open(path, "wb") as fh:
        fh.write(VOLUME_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(volume.voxels.astype("<f4").tobytes())


def load_volume(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(VOLUME_MAGIC))
        if magic != VOLUME_MAGIC:
            raise ValueError(f"not a volume file: bad magic {magic!r}")
        header = json.loads(fh.readline().decode("utf-8"))
        dims = tuple(header["dims"])
        n = int(np.prod(dims))
        raw = np.frombuffer(fh.read(4 * n), dtype="<f4")
    if raw.size != n:
        raise ValueError("volume file truncated")
    spec = PhantomSpec(**header["spec"]) if header.get("spec") else None
    vox = np.clip(raw.astype(np.float64).reshape(dims), 0.0, 1.0)
    if spec is not None and np.allclose(vox, 0):
        warnings.warn("loaded an all-zero volume")
    return Volume(vox, spacing=tuple(header["spacing"]), origin=tuple(header["origin"]), spec=spec)
