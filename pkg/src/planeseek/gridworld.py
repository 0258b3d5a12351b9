"""20x20 grid world with point/line targets and Q-learning demonstrators.

Cells are addressed (x, y); the observation fed to reward models is the
one-hot position map, image[y, x] = 1. The demonstrator is a deliberately
undertrained Q-learning policy, so its trajectories wander before ending on
the target, which is exactly the sub-optimality the ranking models must cope
with.
"""

from __future__ import annotations

import numpy as np

from .demos import Demonstration, Frame
from .geometry import pose as make_pose
from .validation import check_rng

# up, down, left, right, stay as (dx, dy)
ACTIONS = np.array([[0, -1], [0, 1], [-1, 0], [1, 0], [0, 0]])
N_ACTIONS = 5
STAY = 4


class GridWorld:
    def __init__(self, target_cells, width=20, height=20):
        self.width = int(width)
        self.height = int(height)
        cells = [(int(x), int(y)) for x, y in target_cells]
        for x, y in cells:
            if not (1 <= x <= self.width - 2 and 1 <= y <= self.height - 2):
                raise ValueError(f"target cell {(x, y)} is not strictly inside the grid")
        self.target_cells = cells
        self.target_idx = {self.idx(x, y) for x, y in cells}

    @property
    def n_states(self):
        return self.width * self.height

    def idx(self, x, y):
        return y * self.width + x

    def coords(self, s):
        return s % self.width, s // self.width

    def step(self, s, a):
        x, y = self.coords(s)
        dx, dy = ACTIONS[a]
        nx, ny = x + dx, y + dy
        if 0 <= nx < self.width and 0 <= ny < self.height:
            return self.idx(nx, ny)
        return s

    def is_target(self, s):
        return s in self.target_idx

    def one_hot(self, s):
        img = np.zeros((self.height, self.width))
        x, y = self.coords(s)
        img[y, x] = 1.0
        return img

    def all_cell_images(self):
        """One-hot observation for every cell, ordered by state index."""
        return np.stack([self.one_hot(s) for s in range(self.n_states)])

    def cell_pose(self, s):
        x, y = self.coords(s)
        return make_pose(x=float(x), y=float(y))


def random_gridworld(target_kind, rng, width=20, height=20, line_length=5):
    """Grid with a random point target or a random 1x5 line target."""
    rng = check_rng(rng)
    if target_kind == "point":
        x = int(rng.integers(1, width - 1))
        y = int(rng.integers(1, height - 1))
        return GridWorld([(x, y)], width, height)
    if target_kind == "line":
        horizontal = bool(rng.integers(0, 2))
        if horizontal:
            x0 = int(rng.integers(1, width - line_length))
            y = int(rng.integers(1, height - 1))
            cells = [(x0 + i, y) for i in range(line_length)]
        else:
            x = int(rng.integers(1, width - 1))
            y0 = int(rng.integers(1, height - line_length))
            cells = [(x, y0 + i) for i in range(line_length)]
        return GridWorld(cells, width, height)
    raise ValueError(f"unknown target kind {target_kind!r}")


def _greedy_with_ties(q_row, rng):
    m = q_row.max()
    best = np.flatnonzero(q_row >= m - 1e-12)
    if len(best) == 1:
        return int(best[0])
    return int(best[rng.integers(0, len(best))])


def train_target_policy(
    grid, episodes=50, max_steps=100, alpha=0.1, gamma=0.95, epsilon=0.2, rng=None
):
    """Tabular Q-learning toward the target (reward 1 there, 0 elsewhere).

    Episodes terminate on reaching the target. With the default 50 episodes
    the policy is intentionally under-trained.
    """
    rng = check_rng(rng)
    q = np.zeros((grid.n_states, N_ACTIONS))
    for _ in range(episodes):
        s = int(rng.integers(0, grid.n_states))
        for _ in range(max_steps):
            if rng.random() < epsilon:
                a = int(rng.integers(0, N_ACTIONS))
            else:
                a = _greedy_with_ties(q[s], rng)
            s2 = grid.step(s, a)
            if grid.is_target(s2):
                q[s, a] += alpha * (1.0 - q[s, a])
                break
            q[s, a] += alpha * (gamma * q[s2].max() - q[s, a])
            s = s2
    return q


def rollout_to_target(grid, q, rng, max_steps=100, epsilon=0.1):
    """Run the policy from a random start; returns the state path or None."""
    rng = check_rng(rng)
    s = int(rng.integers(0, grid.n_states))
    while grid.is_target(s):
        s = int(rng.integers(0, grid.n_states))
    path = [s]
    for _ in range(max_steps):
        if rng.random() < epsilon:
            a = int(rng.integers(0, N_ACTIONS))
        else:
            a = _greedy_with_ties(q[s], rng)
        s = grid.step(s, a)
        path.append(s)
        if grid.is_target(s):
            return path
    return None


def gridworld_demos(
    grid,
    n_demos,
    train_episodes=50,
    max_steps=100,
    rng=None,
    rollout_epsilon=0.1,
    max_retries=200,
):
    """Generate sub-optimal demonstrations that all end on a target cell."""
    if n_demos < 1:
        raise ValueError("n_demos must be at least 1")
    rng = check_rng(rng)
    q = train_target_policy(
        grid, episodes=train_episodes, max_steps=max_steps, rng=rng
    )
    demos = []
    for k in range(n_demos):
        path = None
        for _ in range(max_retries):
            path = rollout_to_target(grid, q, rng, max_steps, rollout_epsilon)
            if path is not None:
                break
        if path is None:
            raise RuntimeError(
                f"policy failed to reach the target within {max_steps} steps "
                f"after {max_retries} start resamples"
            )
        frames = [
            Frame(image=grid.one_hot(s), pose=grid.cell_pose(s), timestamp=float(t))
            for t, s in enumerate(path)
        ]
        demos.append(Demonstration(frames=frames, source_id=f"grid-{k}"))
    return demos
