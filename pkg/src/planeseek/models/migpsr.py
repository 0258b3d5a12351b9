"""Disentangled spatial-ranking reward model.

Two encoders split each image into task features (feeding the reward head)
and domain features; a decoder reconstructs the image from both, and a
mutual-information critic drives the two codes apart. Each batch applies
four updates in a fixed order:

  1. critic parameters maximize the MI lower bound on both pair members,
  2. (fresh bound) encoders + decoder step on the reconstruction loss,
  3. both encoders step to minimize the MI bound,
  4. task encoder + reward head step on the spatial ranking loss,

with updates 2-4 all using gradients taken at the same post-critic-update
forward pass. Reward inference consults the task encoder only.
"""

from __future__ import annotations

import numpy as np

from ..autodiff import GradientError, Tensor, concat, relu
from ..nets import MLP, assign_named_params
from ..ranking import PairSampler, build_distance_table
from ..validation import check_rng
from .common import (
    RewardModelBase,
    augment_batch,
    make_optimizer,
    mse_loss,
    pair_logit_prob,
    rank_bce,
)
from .mine import MineCore


class MIGPSRReward(RewardModelBase):
    variant = "migpsr"

    def __init__(
        self,
        latent=32,
        hidden=(256, 64),
        fcn_hidden=(64, 16),
        critic_hidden=(128, 64),
        k_re=10.0,
        lr=1e-5,
        lr_critic=None,
        critic_weight_decay=0.01,
        epochs=5,
        batch=8,
        pairs_per_epoch=None,
        k_t=0.5,
        k_r=0.5,
        anchor_frac=0.0,
        mine_ema=0.99,
        encoder_out_act=None,
        optimizer="adam",
        drop_ties=False,
        augment_config=None,
        weight_decay=0.0,
        first_layer_gain=None,
        seed=0,
    ):
        self.latent = latent
        self.hidden = hidden
        self.fcn_hidden = fcn_hidden
        self.critic_hidden = critic_hidden
        self.k_re = k_re
        self.lr = lr
        self.lr_critic = lr_critic
        self.critic_weight_decay = critic_weight_decay
        self.epochs = epochs
        self.batch = batch
        self.pairs_per_epoch = pairs_per_epoch
        self.k_t = k_t
        self.k_r = k_r
        self.anchor_frac = anchor_frac
        self.mine_ema = mine_ema
        self.encoder_out_act = encoder_out_act
        self.optimizer = optimizer
        self.drop_ties = drop_ties
        self.augment_config = augment_config
        self.weight_decay = weight_decay
        self.first_layer_gain = first_layer_gain
        self.seed = seed

    def _build(self, resolution, rng):
        self.resolution_ = tuple(resolution)
        in_dim = int(np.prod(resolution))
        hid = tuple(self.hidden)
        fg = self.first_layer_gain
        act = self.encoder_out_act
        self.enc_r_ = MLP([in_dim, *hid, self.latent], rng, out_act=act, first_gain=fg)
        self.enc_d_ = MLP([in_dim, *hid, self.latent], rng, out_act=act, first_gain=fg)
        self.rec_ = MLP([2 * self.latent, *reversed(hid), in_dim], rng, out_act="sigmoid")
        self.fcn_ = MLP([self.latent, *self.fcn_hidden, 1], rng, out_act="sigmoid")
        self.core_ = MineCore(
            self.latent, self.latent, self.critic_hidden, rng, float(self.mine_ema)
        )

    def _param_groups(self):
        return {
            "critic": self.core_.params(),
            "enc_dec": self.enc_d_.params() + self.enc_r_.params() + self.rec_.params(),
            "encoders": self.enc_d_.params() + self.enc_r_.params(),
            "rank": self.enc_r_.params() + self.fcn_.params(),
        }

    def _snapshot(self):
        return {k: t.data.copy() for k, t in self._named_params().items()}

    def _apply_update(self, loss, opt, loss_name, stage, observer):
        if not np.isfinite(loss.data):
            raise GradientError(
                f"MI-GPSR training diverged in the {loss_name} loss "
                f"(value={float(loss.data)})"
            )
        loss.backward()
        before = self._snapshot() if observer else None
        try:
            opt.step()
        except GradientError as err:
            raise GradientError(f"{loss_name} loss update failed: {err}") from err
        if observer:
            observer(stage, before, self._snapshot())
        for group in self._opts.values():
            group.zero_grad()

    def fit(self, demos, step_observer=None):
        """Train on spatial pairs; ``step_observer(stage, before, after)`` is
        invoked around every sub-update when provided (parameter audits)."""
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
        lr = float(self.lr)
        lr_critic = float(self.lr_critic) if self.lr_critic is not None else lr
        groups = self._param_groups()
        wd = float(self.weight_decay)
        self._opts = {
            "critic": make_optimizer(
                self.optimizer, groups["critic"], lr_critic, float(self.critic_weight_decay)
            ),
            "enc_dec": make_optimizer(self.optimizer, groups["enc_dec"], lr, wd),
            "encoders": make_optimizer(self.optimizer, groups["encoders"], lr, wd),
            "rank": make_optimizer(self.optimizer, groups["rank"], lr, wd),
        }
        steps = self._steps_per_epoch(sampler, self.batch, self.pairs_per_epoch)
        self.history_ = {"rank": [], "recon": [], "mi_bound": []}
        for _ in range(self.epochs):
            for _ in range(steps):
                xa, xb, g = sampler.batch(self.batch)
                xa = augment_batch(xa, self.augment_config, rng)
                xb = augment_batch(xb, self.augment_config, rng)
                self._train_step(
                    xa.reshape(xa.shape[0], -1),
                    xb.reshape(xb.shape[0], -1),
                    g,
                    rng,
                    step_observer,
                )
        return self

    def _train_step(self, xa, xb, g, rng, observer=None):
        ta, tb = Tensor(xa), Tensor(xb)
        n = xa.shape[0]
        perm_a = rng.permutation(n)
        perm_b = rng.permutation(n)

        # critic maximizes the bound on both members
        za_r, za_d = self.enc_r_(ta), self.enc_d_(ta)
        zb_r, zb_d = self.enc_r_(tb), self.enc_d_(tb)
        surrogate = self.core_.critic_surrogate(za_r, za_d, perm_a) + self.core_.critic_surrogate(zb_r, zb_d, perm_b)
        self._apply_update(
            -surrogate, self._opts["critic"], "mutual-information", "mine_update", observer
        )

        # fresh forward under the updated critic; the three remaining updates
        # all differentiate losses from this same forward pass
        za_r, za_d = self.enc_r_(ta), self.enc_d_(ta)
        zb_r, zb_d = self.enc_r_(tb), self.enc_d_(tb)
        rec_a = self.rec_(concat([za_r, za_d], axis=1))
        rec_b = self.rec_(concat([zb_r, zb_d], axis=1))
        l_rec = mse_loss(rec_a, ta) + mse_loss(rec_b, tb)
        bound = self.core_.bound(za_r, za_d, perm_a) + self.core_.bound(zb_r, zb_d, perm_b)
        r_a, r_b = self.fcn_(za_r), self.fcn_(zb_r)
        l_rank = rank_bce(pair_logit_prob(r_a, r_b, float(self.k_re)), g)

        self._apply_update(
            l_rec, self._opts["enc_dec"], "reconstruction", "reconstruction_update", observer
        )
        # mutual information is nonnegative: a negative bound estimate means
        # the critic lags, and chasing it lets the encoders run away, so the
        # encoder gradient is gated to the positive part
        self._apply_update(
            relu(bound), self._opts["encoders"], "mutual-information", "mi_min_update", observer
        )
        self._apply_update(l_rank, self._opts["rank"], "ranking", "rank_update", observer)

        self.history_["rank"].append(float(l_rank.data))
        self.history_["recon"].append(float(l_rec.data) / 2.0)
        self.history_["mi_bound"].append(float(bound.data) / 2.0)

    def _reward_np(self, flat):
        return self.fcn_.forward_np(self.enc_r_.forward_np(flat))

    def domain_code(self, images):
        """Domain-encoder output; provided for analysis, never used by predict."""
        from .common import flatten_images

        return self.enc_d_.forward_np(flatten_images(images))

    def _named_params(self):
        out = self.enc_r_.named_params("enc_r")
        out.update(self.enc_d_.named_params("enc_d"))
        out.update(self.rec_.named_params("rec"))
        out.update(self.fcn_.named_params("fcn"))
        out.update(self.core_.named_params("critic"))
        return out

    # parameter-name groups, used by the gradient-isolation audit
    ISOLATION_GROUPS = {
        "mine_update": ("critic",),
        "reconstruction_update": ("enc_d", "enc_r", "rec"),
        "mi_min_update": ("enc_d", "enc_r"),
        "rank_update": ("enc_r", "fcn"),
    }

    def _load_arrays(self, resolution, arrays):
        self._build(resolution, check_rng(self.seed))
        assign_named_params(self._named_params(), arrays)
        return self
