"""Trainable reward models, their losses, and checkpoint IO."""

from .vae import ImageVAE
from .mine import MineEstimator, MineCore
from .ptr import PTRReward
from .gpsr import GPSRReward
from .migpsr import MIGPSRReward
from .io import save_model, load_model, MODEL_VARIANTS

__all__ = [
    "ImageVAE",
    "MineEstimator",
    "MineCore",
    "PTRReward",
    "GPSRReward",
    "MIGPSRReward",
    "save_model",
    "load_model",
    "MODEL_VARIANTS",
]
