"""Variational autoencoder pretraining on demonstration images."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..autodiff import GradientError, Tensor, add
from ..nets import VaeNet, assign_named_params
from ..validation import check_fitted, check_rng
from .common import flatten_images, make_optimizer, vae_elbo_terms


class ImageVAE(BaseEstimator, TransformerMixin):
    """Gaussian-latent autoencoder over flattened images.

    ``transform`` returns the encoder mean, which is also what downstream
    reward heads consume.
    """

    def __init__(
        self,
        latent=32,
        hidden=(256, 64),
        lr=1e-3,
        epochs=20,
        batch=32,
        steps_per_epoch=None,
        min_images=100,
        weight_decay=0.0,
        first_layer_gain=None,
        optimizer="adam",
        seed=0,
    ):
        self.latent = latent
        self.hidden = hidden
        self.lr = lr
        self.epochs = epochs
        self.batch = batch
        self.steps_per_epoch = steps_per_epoch
        self.min_images = min_images
        self.weight_decay = weight_decay
        self.first_layer_gain = first_layer_gain
        self.optimizer = optimizer
        self.seed = seed

    def _build(self, resolution, rng):
        self.resolution_ = tuple(resolution)
        in_dim = int(np.prod(resolution))
        self.net_ = VaeNet(
            in_dim, tuple(self.hidden), self.latent, rng, first_gain=self.first_layer_gain
        )

    def fit(self, images, y=None):
        arr = np.asarray(images, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"expected (n, H, W) images, got shape {arr.shape}")
        if arr.shape[0] < self.min_images:
            raise ValueError(
                f"VAE pretraining needs at least {self.min_images} images, "
                f"got {arr.shape[0]}"
            )
        rng = check_rng(self.seed)
        self._build(arr.shape[1:], rng)
        flat = arr.reshape(arr.shape[0], -1)
        opt = make_optimizer(
            self.optimizer, self.net_.params(), float(self.lr), float(self.weight_decay)
        )
        steps = self.steps_per_epoch or max(1, flat.shape[0] // self.batch)
        self.history_ = {"loss": [], "recon": [], "kl": []}
        for epoch in range(self.epochs):
            for step in range(steps):
                idx = rng.choice(flat.shape[0], size=min(self.batch, flat.shape[0]), replace=False)
                x = Tensor(flat[idx])
                bce, kl = vae_elbo_terms(self.net_, x, rng)
                loss = add(bce, kl)
                if not np.isfinite(loss.data):
                    raise GradientError(
                        f"VAE training diverged at epoch {epoch} step {step} "
                        f"(loss={float(loss.data)})"
                    )
                loss.backward()
                opt.step()
                opt.zero_grad()
                self.history_["loss"].append(float(loss.data))
                self.history_["recon"].append(float(bce.data))
                self.history_["kl"].append(float(kl.data))
        return self

    def encode(self, images):
        """Latent means for a stack of images (no gradients)."""
        check_fitted(self, "net_")
        return self.net_.encode_np(flatten_images(images))

    def transform(self, images):
        return self.encode(images)

    def reconstruct(self, images):
        check_fitted(self, "net_")
        flat = flatten_images(images)
        out = self.net_.decode_np(self.net_.encode_np(flat))
        return out.reshape(-1, *self.resolution_)

    def _named_params(self):
        check_fitted(self, "net_")
        return self.net_.named_params("vae")

    def _load_arrays(self, resolution, arrays):
        self._build(resolution, check_rng(self.seed))
        assign_named_params(self._named_params(), arrays)
        return self
