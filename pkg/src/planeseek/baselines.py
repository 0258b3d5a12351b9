"""Baseline learners and evaluation utilities for the grid world.

Maximum-entropy IRL recovers a per-cell reward from state-visitation
matching; the tabular Q-learner turns any reward map into a stopping
policy; ``eval_success`` scores a policy by the stop-at-target rule.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator

from .gridworld import ACTIONS, N_ACTIONS, STAY
from .ranking import build_distance_table
from .stats import pearson
from .validation import check_fitted, check_rng


def _transition_table(grid):
    """next_state[s, a] for the deterministic grid."""
    nxt = np.empty((grid.n_states, N_ACTIONS), dtype=int)
    for s in range(grid.n_states):
        for a in range(N_ACTIONS):
            nxt[s, a] = grid.step(s, a)
    return nxt


class MaxEntIRL(BaseEstimator):
    """Maximum-entropy IRL on one-hot state features.

    The gradient on the per-state weights is (empirical visitation -
    expected visitation under the current soft policy). The returned map is
    the logistic of the weights, which keeps it in [0, 1] and leaves
    uninformative weights at mid-level.
    """

    def __init__(self, iters=200, lr=0.1, horizon=100, tol=1e-4):
        self.iters = iters
        self.lr = lr
        self.horizon = horizon
        self.tol = tol

    def fit(self, demos, grid):
        nxt = _transition_table(grid)
        n = grid.n_states
        # empirical state visitation, normalized per demonstration
        emp = np.zeros(n)
        starts = np.zeros(n)
        for demo in demos:
            poses = demo.poses()
            cells = [grid.idx(int(round(p[0])), int(round(p[1]))) for p in poses]
            for c in cells:
                emp[c] += 1.0
            starts[cells[0]] += 1.0
        emp /= emp.sum()
        starts /= starts.sum()
        horizon = int(np.mean([len(d) for d in demos])) if self.horizon is None else self.horizon

        theta = np.zeros(n)
        best = theta.copy()
        best_norm = np.inf
        grad_norm = np.inf
        for _ in range(self.iters):
            expected = _expected_visitation(theta, nxt, starts, horizon)
            grad = emp - expected
            grad_norm = float(np.abs(grad).max())
            if grad_norm < best_norm:
                best_norm = grad_norm
                best = theta.copy()
            theta = theta + self.lr * grad
            if grad_norm < self.tol:
                best = theta.copy()
                break
        else:
            warnings.warn(
                f"ME-IRL did not converge in {self.iters} iterations "
                f"(last gradient max {grad_norm:.2e}); returning best iterate"
            )
            theta = best
        self.theta_ = theta
        self.reward_map_ = 1.0 / (1.0 + np.exp(-theta.reshape(grid.height, grid.width)))
        self.grad_norm_ = grad_norm
        return self


def _expected_visitation(theta, nxt, starts, horizon):
    """Soft value iteration (backward) then visitation propagation (forward)."""
    n, n_actions = nxt.shape
    v = np.zeros(n)
    q = np.empty((n, n_actions))
    for _ in range(horizon):
        q = theta[:, None] + v[nxt]
        m = q.max(axis=1, keepdims=True)
        v = (m + np.log(np.exp(q - m).sum(axis=1, keepdims=True))).ravel()
    m = q.max(axis=1, keepdims=True)
    policy = np.exp(q - m)
    policy /= policy.sum(axis=1, keepdims=True)

    mu = starts.copy()
    total = np.zeros(n)
    for _ in range(horizon):
        total += mu
        flow = mu[:, None] * policy
        mu = np.zeros(n)
        np.add.at(mu, nxt, flow)
    return total / total.sum()


class TabularQPolicy(BaseEstimator):
    """Q-learning over a fixed per-cell reward map, with stopping semantics.

    'Stay' stops and collects the current cell's map value, so Q(s, stay)
    equals the map exactly and is held fixed; move actions pay a small step
    cost and are learned by exploration. Each episode's transitions are
    replayed once in reverse at episode end, which propagates value across
    the grid within the fixed episode budget. The resulting greedy policy
    walks to the best reachable stop and stays there.
    """

    def __init__(
        self,
        episodes=500,
        max_steps=100,
        alpha=0.5,
        alpha_final=0.05,
        gamma=0.999,
        epsilon=1.0,
        epsilon_final=0.05,
        move_cost=0.001,
        backward_replay=True,
        seed=0,
    ):
        self.episodes = episodes
        self.max_steps = max_steps
        self.alpha = alpha
        self.alpha_final = alpha_final
        self.gamma = gamma
        self.epsilon = epsilon
        self.epsilon_final = epsilon_final
        self.move_cost = move_cost
        self.backward_replay = backward_replay
        self.seed = seed

    def fit(self, reward_map, grid):
        reward_map = np.asarray(reward_map, dtype=np.float64)
        if reward_map.shape != (grid.height, grid.width):
            raise ValueError(
                f"reward map shape {reward_map.shape} does not match grid "
                f"{(grid.height, grid.width)}"
            )
        if not np.isfinite(reward_map).all():
            raise ValueError("reward map contains non-finite values")
        rng = check_rng(self.seed)
        rewards = reward_map.reshape(-1)
        nxt = _transition_table(grid)
        gamma = float(self.gamma)
        cost = float(self.move_cost)
        q = np.zeros((grid.n_states, N_ACTIONS))
        q[:, STAY] = rewards  # stopping value is known exactly; never updated
        denom = max(1, self.episodes - 1)
        n_moves = N_ACTIONS - 1
        for episode in range(self.episodes):
            frac = episode / denom
            alpha = float(self.alpha) + frac * (float(self.alpha_final) - float(self.alpha))
            epsilon = float(self.epsilon) + frac * (
                float(self.epsilon_final) - float(self.epsilon)
            )
            s = int(rng.integers(0, grid.n_states))
            transitions = []
            for _ in range(self.max_steps):
                # behavior explores moves only; stopping needs no experience
                if rng.random() < epsilon:
                    a = int(rng.integers(0, n_moves))
                else:
                    a = int(np.argmax(q[s, :n_moves]))
                s2 = nxt[s, a]
                q[s, a] += alpha * (-cost + gamma * q[s2].max() - q[s, a])
                transitions.append((s, a, s2))
                s = s2
            if self.backward_replay:
                for s0, a0, s20 in reversed(transitions):
                    q[s0, a0] += alpha * (-cost + gamma * q[s20].max() - q[s0, a0])
        self.q_ = q
        self.grid_ = grid
        return self

    def greedy_action(self, s):
        check_fitted(self, "q_")
        return int(np.argmax(self.q_[s]))


def eval_success(policy, grid, n_starts=20, max_steps=100, rng=None):
    """Greedy rollouts from random starts; success means occupying a target
    cell whose greedy action is 'stay' within the step budget."""
    rng = check_rng(rng)
    successes = 0
    for _ in range(n_starts):
        s = int(rng.integers(0, grid.n_states))
        ok = False
        for _ in range(max_steps + 1):
            a = policy.greedy_action(s)
            if a == STAY:
                ok = grid.is_target(s)
                break
            s = grid.step(s, a)
        else:
            ok = False
        if ok:
            successes += 1
    return successes


def reward_curve(model, demo, table=None, k_t=0.5, k_r=0.5):
    """Per-frame predicted rewards against the inverse generalized distance.

    Returns frame indices, rewards, the 1 - D reference series, and their
    Pearson correlation (0 with a flag when either series is constant).
    """
    if table is None:
        table = build_distance_table([demo], k_t=k_t, k_r=k_r)
        dist = table.D[0]
    else:
        dist = table.D[0]
    rewards = np.asarray(model.predict(demo.images())).reshape(-1)
    reference = 1.0 - np.asarray(dist)
    corr, degenerate = pearson(rewards, reference)
    return {
        "frame": np.arange(len(demo)),
        "reward": rewards,
        "reference": reference,
        "pearson_r": corr,
        "degenerate": degenerate,
    }
