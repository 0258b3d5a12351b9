"""Stochastic image augmentation chain for reward-model training.

Transforms fire independently in a fixed order (blur, sharpen, noise,
brightness, gamma, vertical crop, horizontal flip); intensity magnitudes are
specified on the 0..255 scale and rescaled to the internal [0, 1] range.
The vertical crop is followed by a bilinear resize back to the original
height so tensor shapes never change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .validation import check_rng


@dataclass(frozen=True)
class AugmentConfig:
    blur_p: float = 0.1
    blur_sigma: tuple = (0.25, 1.5)
    sharpen_p: float = 0.1
    sharpen_amount: tuple = (10.0, 30.0)
    noise_p: float = 0.1
    noise_sigma: tuple = (1.0, 10.0)  # 0..255 scale
    brightness_p: float = 0.1
    brightness: tuple = (-25.0, 25.0)  # 0..255 scale
    gamma_p: float = 0.1
    gamma: tuple = (0.5, 3.0)
    crop_p: float = 0.5
    crop_scale: tuple = (0.8, 0.9)
    flip_p: float = 0.1

    def __post_init__(self):
        for p in (
            self.blur_p,
            self.sharpen_p,
            self.noise_p,
            self.brightness_p,
            self.gamma_p,
            self.crop_p,
            self.flip_p,
        ):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"augmentation probability {p} outside [0, 1]")

    @classmethod
    def identity(cls):
        return cls(
            blur_p=0.0,
            sharpen_p=0.0,
            noise_p=0.0,
            brightness_p=0.0,
            gamma_p=0.0,
            crop_p=0.0,
            flip_p=0.0,
        )


def _resize_rows(img, new_h):
    """Bilinear resize along the vertical axis only."""
    h = img.shape[0]
    if h == new_h:
        return img
    pos = np.linspace(0.0, h - 1.0, new_h)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, h - 1)
    w = (pos - lo)[:, None]
    return img[lo] * (1.0 - w) + img[hi] * w


def augment(img, cfg, rng):
    """Apply the augmentation chain to one [0, 1] image, deterministically per seed."""
    rng = check_rng(rng)
    out = np.asarray(img, dtype=np.float64).copy()
    h = out.shape[0]

    if rng.random() < cfg.blur_p:
        sigma = rng.uniform(*cfg.blur_sigma)
        out = gaussian_filter(out, sigma=sigma, mode="nearest")
        out = np.clip(out, 0.0, 1.0)

    if rng.random() < cfg.sharpen_p:
        amount = rng.uniform(*cfg.sharpen_amount) / 100.0
        blurred = gaussian_filter(out, sigma=1.0, mode="nearest")
        out = np.clip(out + amount * (out - blurred), 0.0, 1.0)

    if rng.random() < cfg.noise_p:
        sigma = rng.uniform(*cfg.noise_sigma) / 255.0
        out = np.clip(out + rng.normal(0.0, sigma, out.shape), 0.0, 1.0)

    if rng.random() < cfg.brightness_p:
        delta = rng.uniform(*cfg.brightness) / 255.0
        out = np.clip(out + delta, 0.0, 1.0)

    if rng.random() < cfg.gamma_p:
        gamma = rng.uniform(*cfg.gamma)
        out = np.clip(out, 0.0, 1.0) ** gamma

    if rng.random() < cfg.crop_p:
        scale = rng.uniform(*cfg.crop_scale)
        ch = max(2, int(round(scale * h)))
        if ch < h:
            top = int(rng.integers(0, h - ch + 1))
            out = _resize_rows(out[top : top + ch], h)
            out = np.clip(out, 0.0, 1.0)

    if rng.random() < cfg.flip_p:
        out = out[:, ::-1].copy()

    return out
