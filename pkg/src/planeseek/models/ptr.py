"""Temporal-ranking reward model: VAE plus reward head trained end to end.

Comparison pairs come from within single demonstrations, labeled by
timestamp order; the joint loss is both members' ELBO terms plus the
binary cross-entropy of the Bernoulli comparison model sigma(r_b - r_a).
"""

from __future__ import annotations

import numpy as np

from ..autodiff import GradientError, Tensor
from ..nets import MLP, VaeNet, assign_named_params
from ..ranking import PairSampler
from ..validation import check_rng
from .common import (
    RewardModelBase,
    augment_batch,
    make_optimizer,
    pair_logit_prob,
    rank_bce,
    vae_elbo_terms,
)


class PTRReward(RewardModelBase):
    variant = "ptr"

    def __init__(
        self,
        latent=32,
        hidden=(256, 64),
        fcn_hidden=(64, 16),
        lr=1e-5,
        epochs=5,
        batch=8,
        pairs_per_epoch=None,
        anchor_frac=0.0,
        augment_config=None,
        weight_decay=0.0,
        first_layer_gain=None,
        optimizer="adam",
        seed=0,
    ):
        self.latent = latent
        self.hidden = hidden
        self.fcn_hidden = fcn_hidden
        self.lr = lr
        self.epochs = epochs
        self.batch = batch
        self.pairs_per_epoch = pairs_per_epoch
        self.anchor_frac = anchor_frac
        self.augment_config = augment_config
        self.weight_decay = weight_decay
        self.first_layer_gain = first_layer_gain
        self.optimizer = optimizer
        self.seed = seed

    def _build(self, resolution, rng):
        self.resolution_ = tuple(resolution)
        in_dim = int(np.prod(resolution))
        self.vae_net_ = VaeNet(
            in_dim, tuple(self.hidden), self.latent, rng, first_gain=self.first_layer_gain
        )
        self.fcn_ = MLP([self.latent, *self.fcn_hidden, 1], rng, out_act="sigmoid")

    def _member_terms(self, x, rng):
        bce, kl = vae_elbo_terms(self.vae_net_, x, rng)
        mu, _ = self.vae_net_.encode(x)
        return bce + kl, self.fcn_(mu)

    def fit(self, demos):
        rng = check_rng(self.seed)
        sampler = PairSampler(demos, "temporal", rng=rng, anchor_frac=self.anchor_frac)
        if sampler.total_pairs() == 0:
            raise ValueError("no temporal pairs can be formed from these demonstrations")
        self._build(demos[0].frames[0].image.shape, rng)
        opt = make_optimizer(
            self.optimizer,
            self.vae_net_.params() + self.fcn_.params(),
            float(self.lr),
            float(self.weight_decay),
        )
        steps = self._steps_per_epoch(sampler, self.batch, self.pairs_per_epoch)
        self.history_ = {"loss": [], "rank": [], "vae": []}
        for epoch in range(self.epochs):
            for _ in range(steps):
                xa, xb, g = sampler.batch(self.batch)
                xa = augment_batch(xa, self.augment_config, rng)
                xb = augment_batch(xb, self.augment_config, rng)
                ta = Tensor(xa.reshape(xa.shape[0], -1))
                tb = Tensor(xb.reshape(xb.shape[0], -1))
                lv_a, r_a = self._member_terms(ta, rng)
                lv_b, r_b = self._member_terms(tb, rng)
                l_rank = rank_bce(pair_logit_prob(r_a, r_b), g)
                loss = lv_a + lv_b + l_rank
                if not np.isfinite(loss.data):
                    raise GradientError(
                        f"PTR training diverged at epoch {epoch} (loss={float(loss.data)})"
                    )
                loss.backward()
                opt.step()
                opt.zero_grad()
                self.history_["loss"].append(float(loss.data))
                self.history_["rank"].append(float(l_rank.data))
                self.history_["vae"].append(float(lv_a.data) + float(lv_b.data))
        return self

    def _reward_np(self, flat):
        return self.fcn_.forward_np(self.vae_net_.encode_np(flat))

    def _named_params(self):
        out = self.vae_net_.named_params("vae")
        out.update(self.fcn_.named_params("fcn"))
        return out

    def _load_arrays(self, resolution, arrays):
        self._build(resolution, check_rng(self.seed))
        assign_named_params(self._named_params(), arrays)
        return self
