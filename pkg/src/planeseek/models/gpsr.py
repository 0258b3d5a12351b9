"""Global spatial-ranking reward model on a frozen pretrained encoder.

Pairs are drawn across all demonstrations and labeled by generalized
distance; only the reward head is trained, against the comparison model
sigma(k_re * (r_b - r_a)).
"""

from __future__ import annotations

import numpy as np

from ..autodiff import GradientError, Tensor
from ..nets import MLP, assign_named_params
from ..ranking import PairSampler, build_distance_table
from ..validation import check_rng
from .common import RewardModelBase, augment_batch, make_optimizer, pair_logit_prob, rank_bce


class GPSRReward(RewardModelBase):
    variant = "gpsr"

    def __init__(
        self,
        vae=None,
        k_re=10.0,
        fcn_hidden=(64, 16),
        lr=1e-5,
        epochs=5,
        batch=8,
        pairs_per_epoch=None,
        k_t=0.5,
        k_r=0.5,
        anchor_frac=0.0,
        drop_ties=False,
        augment_config=None,
        weight_decay=0.0,
        optimizer="adam",
        seed=0,
    ):
        self.vae = vae
        self.k_re = k_re
        self.fcn_hidden = fcn_hidden
        self.lr = lr
        self.epochs = epochs
        self.batch = batch
        self.pairs_per_epoch = pairs_per_epoch
        self.k_t = k_t
        self.k_r = k_r
        self.anchor_frac = anchor_frac
        self.drop_ties = drop_ties
        self.augment_config = augment_config
        self.weight_decay = weight_decay
        self.optimizer = optimizer
        self.seed = seed

    def _require_vae(self):
        if self.vae is None or not hasattr(self.vae, "net_"):
            raise ValueError(
                "GPSR requires a pretrained VAE encoder; none was provided "
                "(missing VAE checkpoint)"
            )
        return self.vae

    def _build(self, resolution, rng):
        vae = self._require_vae()
        if tuple(vae.resolution_) != tuple(resolution):
            raise ValueError(
                f"pretrained VAE resolution {vae.resolution_} does not match "
                f"demonstration images {tuple(resolution)}"
            )
        self.resolution_ = tuple(resolution)
        self.fcn_ = MLP([vae.latent, *self.fcn_hidden, 1], rng, out_act="sigmoid")

    def fit(self, demos):
        rng = check_rng(self.seed)
        table = build_distance_table(demos, k_t=self.k_t, k_r=self.k_r)
        sampler = PairSampler(
            demos,
            "spatial",
            table=table,
            rng=rng,
            drop_ties=self.drop_ties,
            anchor_frac=self.anchor_frac,
        )
        if sampler.total_pairs() == 0:
            raise ValueError("no spatial pairs can be formed from these demonstrations")
        self._build(demos[0].frames[0].image.shape, rng)
        vae = self.vae
        opt = make_optimizer(
            self.optimizer, self.fcn_.params(), float(self.lr), float(self.weight_decay)
        )
        steps = self._steps_per_epoch(sampler, self.batch, self.pairs_per_epoch)
        self.history_ = {"rank": []}
        for epoch in range(self.epochs):
            for _ in range(steps):
                xa, xb, g = sampler.batch(self.batch)
                xa = augment_batch(xa, self.augment_config, rng)
                xb = augment_batch(xb, self.augment_config, rng)
                # frozen encoder: latents are plain data, no gradient flows back
                za = Tensor(vae.encode(xa))
                zb = Tensor(vae.encode(xb))
                r_a = self.fcn_(za)
                r_b = self.fcn_(zb)
                l_rank = rank_bce(pair_logit_prob(r_a, r_b, float(self.k_re)), g)
                if not np.isfinite(l_rank.data):
                    raise GradientError(
                        f"GPSR training diverged at epoch {epoch} "
                        f"(loss={float(l_rank.data)})"
                    )
                l_rank.backward()
                opt.step()
                opt.zero_grad()
                self.history_["rank"].append(float(l_rank.data))
        return self

    def _reward_np(self, flat):
        return self.fcn_.forward_np(self.vae.net_.encode_np(flat))

    def _named_params(self):
        out = self.vae._named_params()
        out.update(self.fcn_.named_params("fcn"))
        return out

    def _load_arrays(self, resolution, arrays):
        self._build(resolution, check_rng(self.seed))
        assign_named_params(self._named_params(), arrays)
        return self
