"""Neural lower-bound estimation of mutual information.

The bound for a batch is mean(T(a, b)) - log(mean(exp(T(a, b_shuffled)))).
Reported values always use the exact log-mean-exp form; the critic's
training gradient replaces the log-denominator with an exponential moving
average, which removes the bias the naive gradient carries.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ..autodiff import exp, gather_rows, log_mean_exp, mean, neg, sub
from ..nets import MineCritic
from ..validation import check_fitted, check_rng


class MineCore:
    """Critic plus bound/surrogate computations, shared with MI-GPSR training.

    The moving average of the marginal partition term lives in log space so a
    drifting critic cannot overflow the correction.
    """

    def __init__(self, dim_a, dim_b, hidden, rng, ema_decay=0.99):
        self.critic = MineCritic(dim_a, dim_b, tuple(hidden), rng)
        self.ema_decay = float(ema_decay)
        self.log_ema = None

    def bound(self, za, zb, perm):
        """Differentiable lower bound on I(za; zb) for one batch."""
        joint = self.critic(za, zb)
        marg = self.critic(za, gather_rows(zb, perm))
        return sub(mean(joint), log_mean_exp(marg))

    def critic_surrogate(self, za, zb, perm):
        """Objective whose gradient is the EMA-debiased bound gradient.

        Its value is not the bound; use ``bound`` for reporting.
        """
        joint = self.critic(za, zb)
        marg = self.critic(za, gather_rows(zb, perm))
        m = marg.data
        shift = m.max()
        log_batch = float(shift + np.log(np.mean(np.exp(m - shift))))
        if self.log_ema is None:
            self.log_ema = log_batch
        else:
            self.log_ema = float(
                np.logaddexp(
                    np.log(self.ema_decay) + self.log_ema,
                    np.log1p(-self.ema_decay) + log_batch,
                )
            )
        return sub(mean(joint), mean(exp(sub(marg, self.log_ema))))

    def bound_value(self, a, b, perm):
        """Bound on raw arrays without building a tape."""
        joint = self.critic.forward_np(a, b)
        marg = self.critic.forward_np(a, b[perm])
        shift = marg.max()
        return float(joint.mean() - (shift + np.log(np.mean(np.exp(marg - shift)))))

    def params(self):
        return self.critic.params()

    def named_params(self, prefix="critic"):
        return self.critic.named_params(prefix)


class MineEstimator(BaseEstimator):
    """Trainable mutual-information lower bound between two sample sets."""

    def __init__(
        self,
        hidden=(128, 64),
        lr=1e-3,
        steps=2000,
        batch=256,
        ema_decay=0.99,
        seed=0,
    ):
        self.hidden = hidden
        self.lr = lr
        self.steps = steps
        self.batch = batch
        self.ema_decay = ema_decay
        self.seed = seed

    @staticmethod
    def _columns(x):
        x = np.asarray(x, dtype=np.float64)
        return x[:, None] if x.ndim == 1 else x

    def fit(self, X, Y):
        from ..autodiff import Adam

        X = self._columns(X)
        Y = self._columns(Y)
        if X.shape[0] != Y.shape[0]:
            raise ValueError(f"sample count mismatch: {X.shape[0]} vs {Y.shape[0]}")
        if X.shape[0] < 2:
            raise ValueError("mutual-information estimation needs at least 2 samples")
        rng = check_rng(self.seed)
        self.core_ = MineCore(X.shape[1], Y.shape[1], self.hidden, rng, self.ema_decay)
        opt = Adam(self.core_.params(), lr=self.lr)
        n = X.shape[0]
        bsz = int(min(self.batch, n))
        self.history_ = {"bound": []}
        for _ in range(self.steps):
            idx = rng.choice(n, size=bsz, replace=False)
            perm = rng.permutation(bsz)
            surrogate = self.core_.critic_surrogate(
                _const(X[idx]), _const(Y[idx]), perm
            )
            loss = neg(surrogate)
            loss.backward()
            opt.step()
            opt.zero_grad()
            self.history_["bound"].append(self.core_.bound_value(X[idx], Y[idx], perm))
        self.mi_estimate_ = self.lower_bound(X, Y, rng=rng)
        return self

    def lower_bound(self, X, Y, n_shuffles=8, rng=None):
        """Full-sample bound, averaged over independent marginal shuffles."""
        check_fitted(self, "core_")
        X = self._columns(X)
        Y = self._columns(Y)
        rng = check_rng(rng if rng is not None else self.seed + 1)
        vals = [
            self.core_.bound_value(X, Y, rng.permutation(X.shape[0]))
            for _ in range(n_shuffles)
        ]
        return float(np.mean(vals))


def _const(arr):
    from ..autodiff import Tensor

    return Tensor(arr)
