"""Input validation helpers shared by the estimator classes."""

from __future__ import annotations

import numpy as np


def check_rng(seed_or_rng):
    """Coerce an int seed, None, or Generator into a numpy Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def check_image(img, resolution=None, name="image"):
    """Validate a 2D float image in [0, 1]; optionally pin its resolution."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {img.shape}")
    if resolution is not None and img.shape != tuple(resolution):
        raise ValueError(
            f"{name} resolution mismatch: expected {tuple(resolution)}, got {img.shape}"
        )
    return img


def check_image_stack(images, resolution=None):
    """Stack a sequence of images into (n, H, W), validating each."""
    arrs = [check_image(im, resolution) for im in images]
    if not arrs:
        raise ValueError("empty image collection")
    shapes = {a.shape for a in arrs}
    if len(shapes) > 1:
        raise ValueError(f"inconsistent image shapes: {sorted(shapes)}")
    return np.stack(arrs)


def check_pose(pose):
    """Validate a 6-DoF pose (x, y, z, Rx, Ry, Rz)."""
    pose = np.asarray(pose, dtype=np.float64)
    if pose.shape != (6,):
        raise ValueError(f"pose must have 6 components, got shape {pose.shape}")
    return pose


def check_fitted(estimator, attr):
    if not hasattr(estimator, attr):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted (missing {attr}); call fit first"
        )
