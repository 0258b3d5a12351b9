"""Grid world and Q-learning demonstrators."""

import numpy as np
import pytest

from planeseek import GridWorld, gridworld_demos, random_gridworld
from planeseek.gridworld import STAY, train_target_policy


def test_actions_and_boundaries():
    grid = GridWorld([(5, 5)])
    corner = grid.idx(0, 0)
    assert grid.step(corner, 0) == corner  # up off-grid
    assert grid.step(corner, 2) == corner  # left off-grid
    assert grid.step(corner, STAY) == corner
    assert grid.coords(grid.step(corner, 3)) == (1, 0)
    assert grid.coords(grid.step(corner, 1)) == (0, 1)


def test_target_strictly_inside():
    with pytest.raises(ValueError):
        GridWorld([(0, 5)])
    with pytest.raises(ValueError):
        GridWorld([(5, 19)])


def test_one_hot_layout():
    grid = GridWorld([(5, 5)])
    img = grid.one_hot(grid.idx(3, 7))
    assert img.shape == (20, 20)
    assert img[7, 3] == 1.0 and img.sum() == 1.0
    assert np.allclose(grid.cell_pose(grid.idx(3, 7)), [3, 7, 0, 0, 0, 0])


def test_random_gridworld_kinds():
    rng = np.random.default_rng(0)
    point = random_gridworld("point", rng)
    assert len(point.target_cells) == 1
    line = random_gridworld("line", rng)
    assert len(line.target_cells) == 5
    xs = {c[0] for c in line.target_cells}
    ys = {c[1] for c in line.target_cells}
    assert len(xs) == 1 or len(ys) == 1  # a straight 1x5 run
    with pytest.raises(ValueError):
        random_gridworld("blob", rng)


def test_all_demos_end_on_target():
    rng = np.random.default_rng(3)
    for kind, n in (("point", 5), ("line", 10)):
        grid = random_gridworld(kind, rng)
        demos = gridworld_demos(grid, n, rng=rng)
        assert len(demos) == n
        for demo in demos:
            x, y = int(demo.end_pose[0]), int(demo.end_pose[1])
            assert grid.is_target(grid.idx(x, y))
            # intermediate states never sit on the target
            for f in demo.frames[:-1]:
                assert not grid.is_target(grid.idx(int(f.pose[0]), int(f.pose[1])))


def test_demos_are_suboptimal_walks():
    rng = np.random.default_rng(4)
    grid = random_gridworld("point", rng)
    demos = gridworld_demos(grid, 8, rng=rng)
    tx, ty = grid.target_cells[0]
    optimal = [
        abs(d.frames[0].pose[0] - tx) + abs(d.frames[0].pose[1] - ty) for d in demos
    ]
    actual = [len(d) - 1 for d in demos]
    # at least some demonstrations take longer than the Manhattan distance
    assert any(a > o for a, o in zip(actual, optimal))


def test_n_demos_validation():
    grid = GridWorld([(5, 5)])
    with pytest.raises(ValueError):
        gridworld_demos(grid, 0, rng=0)


def test_target_policy_reaches_target_with_training():
    grid = GridWorld([(10, 10)])
    q = train_target_policy(grid, episodes=400, rng=np.random.default_rng(0))
    # well-trained policy: from a nearby cell the greedy path reaches the target
    s = grid.idx(8, 10)
    for _ in range(50):
        if grid.is_target(s):
            break
        s = grid.step(s, int(np.argmax(q[s])))
    assert grid.is_target(s)
