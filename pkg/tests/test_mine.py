"""Mutual-information lower-bound estimator."""

import numpy as np
import pytest

from planeseek import MineEstimator
from planeseek.autodiff import Tensor
from planeseek.models.mine import MineCore


def test_zero_critic_gives_zero_bound():
    rng = np.random.default_rng(0)
    core = MineCore(2, 2, (8, 4), rng)
    for layer in core.critic.net.layers:
        layer.w.data[:] = 0.0
        layer.b.data[:] = 0.0
    a = rng.normal(size=(16, 2))
    b = rng.normal(size=(16, 2))
    assert core.bound_value(a, b, rng.permutation(16)) == pytest.approx(0.0, abs=1e-12)
    t_bound = core.bound(Tensor(a), Tensor(b), rng.permutation(16))
    assert t_bound.item() == pytest.approx(0.0, abs=1e-12)


def test_surrogate_gradient_direction_increases_bound():
    rng = np.random.default_rng(1)
    # strongly dependent pair: y = x
    x = rng.normal(size=(2000, 1))
    est = MineEstimator(hidden=(32, 16), lr=2e-3, steps=400, batch=128, seed=0)
    est.fit(x, x.copy())
    assert est.mi_estimate_ > 0.5


def test_independent_inputs_bound_near_zero():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(4000, 1))
    y = rng.normal(size=(4000, 1))
    est = MineEstimator(hidden=(64, 32), lr=1e-3, steps=600, batch=256, seed=0)
    est.fit(x, y)
    assert abs(est.mi_estimate_) <= 0.05


def test_sample_validation():
    with pytest.raises(ValueError):
        MineEstimator().fit(np.zeros((1, 2)), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        MineEstimator().fit(np.zeros((4, 2)), np.zeros((5, 2)))


def test_lower_bound_requires_fit():
    est = MineEstimator()
    with pytest.raises(RuntimeError):
        est.lower_bound(np.zeros((4, 1)), np.zeros((4, 1)))
