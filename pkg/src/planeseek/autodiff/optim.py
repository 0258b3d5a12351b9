"""Stochastic optimizers over Tensor parameters.

``backward`` zeroes and refills gradients of everything reachable from the
loss, so a step sequence is: forward, loss.backward(), opt.step(),
opt.zero_grad(). Steps are refused atomically when any gradient is NaN.
"""

from __future__ import annotations

import numpy as np

from .tensor import GradientError, Tensor


class Optimizer:
    def __init__(self, params):
        self.params = list(params)
        if not all(isinstance(p, Tensor) for p in self.params):
            raise TypeError("optimizer parameters must be Tensors")

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def _gather_grads(self):
        grads = []
        for p in self.params:
            g = p.grad
            if g is None:
                g = np.zeros_like(p.data)
            elif np.isnan(g).any():
                raise GradientError("NaN in gradients; step refused")
            grads.append(g)
        return grads

    def step(self):
        raise NotImplementedError


class SGD(Optimizer):
    def __init__(self, params, lr=0.01):
        super().__init__(params)
        self.lr = float(lr)

    def step(self):
        grads = self._gather_grads()
        for p, g in zip(self.params, grads):
            p.data -= self.lr * g


class Adam(Optimizer):
    """Adam with optional decoupled weight decay (applied outside the moments)."""

    def __init__(self, params, lr=1e-5, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
        super().__init__(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.weight_decay = float(weight_decay)
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        grads = self._gather_grads()
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        scale = self.lr / b1t
        for i, (p, g) in enumerate(zip(self.params, grads)):
            m, v = self.m[i], self.v[i]
            # in-place moment updates; temporaries reuse one buffer
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            denom = np.sqrt(v / b2t)
            denom += self.eps
            p.data -= scale * m / denom
            if self.weight_decay:
                p.data -= self.lr * self.weight_decay * p.data
