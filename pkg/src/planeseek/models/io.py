"""Model checkpointing: binary parameters plus a JSON sidecar.

The sidecar (``<path>.json``) records the variant, image resolution, and
constructor configuration so ``load_model`` can rebuild the estimator and
pour the parameters back in.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..autodiff import load_tensors, save_tensors
from ..nets import assign_named_params
from .gpsr import GPSRReward
from .migpsr import MIGPSRReward
from .ptr import PTRReward
from .vae import ImageVAE

MODEL_VARIANTS = {
    "vae": ImageVAE,
    "ptr": PTRReward,
    "gpsr": GPSRReward,
    "migpsr": MIGPSRReward,
}

SIDECAR_VERSION = 1


def _sidecar_path(path):
    return Path(str(path) + ".json")


def save_model(model, path, extra=None):
    variant = getattr(model, "variant", None) or (
        "vae" if isinstance(model, ImageVAE) else None
    )
    if variant not in MODEL_VARIANTS:
        raise ValueError(f"cannot checkpoint object of type {type(model).__name__}")
    named = model._named_params()
    save_tensors(path, {k: t.data for k, t in named.items()})
    params = {k: v for k, v in model.get_params(deep=False).items() if k != "vae"}
    params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()}
    if variant == "gpsr":
        params["vae_config"] = {
            "latent": model.vae.latent,
            "hidden": list(model.vae.hidden),
            "seed": model.vae.seed,
        }
    sidecar = {
        "format_version": SIDECAR_VERSION,
        "variant": variant,
        "resolution": list(model.resolution_),
        "params": params,
        "extra": extra or {},
    }
    # augment configs are not JSON data; record presence only
    if "augment_config" in sidecar["params"]:
        sidecar["params"]["augment_config"] = None
    with open(_sidecar_path(path), "w") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=1)


def load_model(path):
    sidecar_file = _sidecar_path(path)
    if not sidecar_file.exists():
        raise FileNotFoundError(f"missing model sidecar {sidecar_file}")
    with open(sidecar_file) as fh:
        sidecar = json.load(fh)
    variant = sidecar["variant"]
    if variant not in MODEL_VARIANTS:
        raise ValueError(f"unknown model variant {variant!r} in {sidecar_file}")
    params = dict(sidecar["params"])
    vae_config = params.pop("vae_config", None)
    params = {k: (tuple(v) if isinstance(v, list) else v) for k, v in params.items()}
    cls = MODEL_VARIANTS[variant]
    arrays = load_tensors(path)
    resolution = tuple(sidecar["resolution"])
    if variant == "gpsr":
        vae = ImageVAE(
            latent=vae_config["latent"],
            hidden=tuple(vae_config["hidden"]),
            seed=vae_config["seed"],
        )
        vae._load_arrays(resolution, {k: v for k, v in arrays.items() if k.startswith("vae/")})
        model = cls(vae=vae, **params)
        model.resolution_ = resolution
        model._build(resolution, np.random.default_rng(model.seed))
        assign_named_params(
            model.fcn_.named_params("fcn"),
            {k: v for k, v in arrays.items() if k.startswith("fcn/")},
        )
        return model
    model = cls(**params)
    return model._load_arrays(resolution, arrays)
