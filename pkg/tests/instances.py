"""Seeded planning problems shared by the motion tests and the acceptance suite."""
from __future__ import annotations

import numpy as np

from feedback_tamp.geometry import OrientedBox2, Pose2
from oracles import grid_bfs_connected, point_in_box

UNIT = (0.0, 1.0, 0.0, 1.0)


def corridor():
    """Wall at x=0.5 with a 0.2 m gap centred at y=0.5."""
    slabs = [
        OrientedBox2(Pose2(0.5, 0.2), 0.05, 0.2),
        OrientedBox2(Pose2(0.5, 0.8), 0.05, 0.2),
    ]
    return slabs, Pose2(0.1, 0.1), Pose2(0.9, 0.1)


def _free_point(rng, obstacles):
    while True:
        x, y = rng.uniform(0.02, 0.98, size=2)
        if not any(point_in_box(x, y, b, 0.02) for b in obstacles):
            return Pose2(float(x), float(y), float(rng.uniform(-3, 3)))


def random_instance(rng: np.random.Generator):
    n = int(rng.integers(2, 7))
    obstacles = [
        OrientedBox2(Pose2(*rng.uniform(0.1, 0.9, size=2), rng.uniform(-np.pi, np.pi)),
                     *rng.uniform(0.03, 0.18, size=2))
        for _ in range(n)
    ]
    return obstacles, _free_point(rng, obstacles), _free_point(rng, obstacles)


def solvable_instances(count: int, seed: int = 0):
    """``count`` random problems that the grid BFS oracle certifies as connected."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        obstacles, start, goal = random_instance(rng)
        if grid_bfs_connected(obstacles, UNIT, start.as_tuple()[:2], goal.as_tuple()[:2]):
            out.append((obstacles, start, goal))
    return out

