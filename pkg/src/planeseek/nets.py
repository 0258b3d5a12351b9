"""Multilayer-perceptron building blocks on the autodiff core.

Every module exposes ``params()`` (trainable Tensors), ``named_params``
(checkpoint naming), a differentiable ``__call__`` on Tensors, and a
``forward_np`` fast path on raw arrays for inference.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, add, concat, exp, matmul, mul, relu, sigmoid, tanh

_ACTS = {
    "relu": (relu, lambda x: np.maximum(x, 0.0)),
    "tanh": (tanh, np.tanh),
    "sigmoid": (sigmoid, lambda x: 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))),
    None: (lambda t: t, lambda x: x),
}


class Linear:
    def __init__(self, n_in, n_out, rng, gain=2.0):
        scale = np.sqrt(gain / n_in)
        self.w = Tensor(rng.normal(0.0, scale, (n_in, n_out)), requires_grad=True)
        self.b = Tensor(np.zeros(n_out), requires_grad=True)

    def __call__(self, x):
        return add(matmul(x, self.w), self.b)

    def forward_np(self, x):
        return x @ self.w.data + self.b.data

    def params(self):
        return [self.w, self.b]


class MLP:
    """Fully connected stack: hidden activations plus optional output activation.

    ``first_gain`` overrides the first layer's init gain; near-zero values
    make rows that never receive gradient (e.g. one-hot inputs for cells
    absent from training) map to one shared output instead of init noise.
    """

    def __init__(self, dims, rng, hidden_act="relu", out_act=None, first_gain=None):
        if len(dims) < 2:
            raise ValueError("MLP needs at least input and output dims")
        self.layers = [
            Linear(
                dims[i],
                dims[i + 1],
                rng,
                gain=(first_gain if i == 0 and first_gain is not None else 2.0),
            )
            for i in range(len(dims) - 1)
        ]
        self.hidden_act = hidden_act
        self.out_act = out_act

    def __call__(self, x):
        act, _ = _ACTS[self.hidden_act]
        out_act, _ = _ACTS[self.out_act]
        for layer in self.layers[:-1]:
            x = act(layer(x))
        return out_act(self.layers[-1](x))

    def forward_np(self, x):
        _, act = _ACTS[self.hidden_act]
        _, out_act = _ACTS[self.out_act]
        for layer in self.layers[:-1]:
            x = act(layer.forward_np(x))
        return out_act(self.layers[-1].forward_np(x))

    def params(self):
        return [p for layer in self.layers for p in layer.params()]

    def named_params(self, prefix):
        out = {}
        for i, layer in enumerate(self.layers):
            out[f"{prefix}/{i}/w"] = layer.w
            out[f"{prefix}/{i}/b"] = layer.b
        return out


class VaeNet:
    """Gaussian-latent autoencoder: trunk + (mu, logvar) heads + decoder to logits."""

    def __init__(self, in_dim, hidden, latent, rng, first_gain=None):
        dims = [in_dim, *hidden]
        self.trunk = MLP(dims, rng, hidden_act="relu", out_act="relu", first_gain=first_gain)
        self.mu_head = Linear(hidden[-1], latent, rng, gain=1.0)
        self.logvar_head = Linear(hidden[-1], latent, rng, gain=1.0)
        self.decoder = MLP([latent, *reversed(hidden), in_dim], rng, hidden_act="relu")
        self.latent = latent

    def encode(self, x):
        h = self.trunk(x)
        return self.mu_head(h), self.logvar_head(h)

    def encode_np(self, x):
        h = self.trunk.forward_np(x)
        return self.mu_head.forward_np(h)

    def reparameterize(self, mu, logvar, rng):
        eps = Tensor(rng.standard_normal(mu.shape))
        std = exp(mul(logvar, 0.5))
        return add(mu, mul(std, eps))

    def decode(self, z):
        return self.decoder(z)

    def decode_np(self, z):
        logits = self.decoder.forward_np(z)
        return 1.0 / (1.0 + np.exp(-np.clip(logits, -500, 500)))

    def params(self):
        return (
            self.trunk.params()
            + self.mu_head.params()
            + self.logvar_head.params()
            + self.decoder.params()
        )

    def named_params(self, prefix="vae"):
        out = self.trunk.named_params(f"{prefix}/trunk")
        out[f"{prefix}/mu/w"] = self.mu_head.w
        out[f"{prefix}/mu/b"] = self.mu_head.b
        out[f"{prefix}/logvar/w"] = self.logvar_head.w
        out[f"{prefix}/logvar/b"] = self.logvar_head.b
        out.update(self.decoder.named_params(f"{prefix}/dec"))
        return out


class MineCritic:
    """Statistics network T(z_r, z_d) for the mutual-information bound."""

    def __init__(self, dim_a, dim_b, hidden, rng):
        self.net = MLP([dim_a + dim_b, *hidden, 1], rng, hidden_act="relu")

    def __call__(self, za, zb):
        return self.net(concat([za, zb], axis=1))

    def forward_np(self, za, zb):
        return self.net.forward_np(np.concatenate([za, zb], axis=1))

    def params(self):
        return self.net.params()

    def named_params(self, prefix="critic"):
        return self.net.named_params(prefix)


def assign_named_params(named, arrays):
    """Load checkpoint arrays into live parameter Tensors, shape-checked."""
    missing = set(named) - set(arrays)
    extra = set(arrays) - set(named)
    if missing or extra:
        raise ValueError(
            f"checkpoint does not match model: missing={sorted(missing)}, "
            f"unexpected={sorted(extra)}"
        )
    for name, tensor in named.items():
        arr = np.asarray(arrays[name], dtype=np.float64)
        if arr.shape != tensor.data.shape:
            raise ValueError(
                f"parameter {name}: checkpoint shape {arr.shape} != model shape "
                f"{tensor.data.shape}"
            )
        tensor.data = arr.copy()
