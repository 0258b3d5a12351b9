"""Shared machinery for the pairwise-ranking reward models."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ..augment import augment
from ..autodiff import Tensor, log, mean, mul, neg, sigmoid, softplus, sub, tsum
from ..validation import check_fitted, check_image


def flatten_images(images):
    arr = np.asarray(images, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    return arr.reshape(arr.shape[0], -1)


def augment_batch(images, cfg, rng):
    """Independent augmentation per image, identity when no config is set."""
    if cfg is None:
        return np.asarray(images, dtype=np.float64)
    return np.stack([augment(im, cfg, rng) for im in images])


def rank_bce(prob, labels):
    """Binary cross-entropy between predicted comparison probs and labels."""
    g = Tensor(np.asarray(labels, dtype=np.float64).reshape(-1, 1))
    return neg(mean(g * log(prob) + (1.0 - g) * log(1.0 - prob)))


def pair_logit_prob(r_a, r_b, gain=1.0):
    """Comparison probability sigma(gain * (r_b - r_a))."""
    diff = sub(r_b, r_a)
    if gain != 1.0:
        diff = mul(diff, gain)
    return sigmoid(diff)


def vae_elbo_terms(net, x, rng):
    """(reconstruction NLL, KL) per batch: pixel sums, batch means."""
    b = float(x.shape[0])
    mu, logvar = net.encode(x)
    z = net.reparameterize(mu, logvar, rng)
    logits = net.decode(z)
    bce = tsum(sub(softplus(logits), mul(logits, x))) * (1.0 / b)
    from ..autodiff import exp  # local import keeps the op list obvious above

    kl = tsum(exp(logvar) + mul(mu, mu) - 1.0 - logvar) * (0.5 / b)
    return bce, kl


def mse_loss(pred, x):
    """Per-pixel mean squared error, averaged over the batch."""
    diff = sub(pred, x)
    return mean(mul(diff, diff))


class RewardModelBase(BaseEstimator):
    """fit(demonstrations) / predict(images) surface shared by all variants."""

    variant = None

    def predict(self, images):
        """Reward in [0, 1] for each image; resolution must match training."""
        check_fitted(self, "resolution_")
        arr = np.asarray(images, dtype=np.float64)
        single = arr.ndim == 2
        if single:
            arr = arr[None]
        for im in arr:
            check_image(im, self.resolution_)
        out = self._reward_np(arr.reshape(arr.shape[0], -1)).reshape(-1)
        return float(out[0]) if single else out

    def _reward_np(self, flat):
        raise NotImplementedError

    def _steps_per_epoch(self, sampler, batch, pairs_per_epoch):
        per_epoch = pairs_per_epoch if pairs_per_epoch else sampler.total_pairs()
        return max(1, int(np.ceil(per_epoch / batch)))


def make_optimizer(kind, params, lr, weight_decay=0.0):
    """Optimizer factory: Adam (default) or plain SGD."""
    from ..autodiff import SGD, Adam

    if kind == "adam":
        return Adam(params, lr=lr, weight_decay=weight_decay)
    if kind == "sgd":
        return SGD(params, lr=lr)
    raise ValueError(f"unknown optimizer {kind!r} (expected 'adam' or 'sgd')")
