"""Brute-force references, deliberately independent of the code under test.

Nothing here uses separating axes, corner transforms from the package, or
the RRT; only point sampling and grid search.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np


def _box_grid(cx, cy, theta, hx, hy, n):
    u = np.linspace(-hx, hx, n)
    v = np.linspace(-hy, hy, n)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    c, s = math.cos(theta), math.sin(theta)
    return cx + uu * c - vv * s, cy + uu * s + vv * c


def _inside(px, py, cx, cy, theta, hx, hy, slack):
    c, s = math.cos(theta), math.sin(theta)
    dx, dy = px - cx, py - cy
    lx = dx * c + dy * s
    ly = -dx * s + dy * c
    return (np.abs(lx) <= hx + slack) & (np.abs(ly) <= hy + slack)


def _params(b):
    return b.center.x, b.center.y, b.center.theta, b.half_x, b.half_y


def grid_overlap(a, b, n: int = 200, tol: float = 1e-9) -> bool:
    """Interiors meet iff some grid sample of one box is strictly inside the other."""
    for p, q in ((b, a), (a, b)):
        px, py = _box_grid(*_params(p), n)
        if _inside(px, py, *_params(q), -tol).any():
            return True
    return False


def grid_contains(outer, inner, n: int = 200, tol: float = 1e-9) -> bool:
    px, py = _box_grid(*_params(inner), n)
    return bool(_inside(px, py, *_params(outer), tol).all())


def grid_free_mask(obstacles, bounds, res: float = 0.01):
    """Cell-centre occupancy on a regular grid; True = free."""
    x0, x1, y0, y1 = bounds
    nx, ny = int(round((x1 - x0) / res)), int(round((y1 - y0) / res))
    xs = x0 + (np.arange(nx) + 0.5) * res
    ys = y0 + (np.arange(ny) + 0.5) * res
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    free = np.ones_like(gx, dtype=bool)
    for b in obstacles:
        # inflate by half a cell diagonal so free cells are free over their whole area
        free &= ~_inside(gx, gy, *_params(b), res * math.sqrt(0.5))
    return free, xs, ys


def grid_bfs_connected(obstacles, bounds, start, goal, res: float = 0.01) -> bool:
    """4-connected BFS between the cells holding ``start`` and ``goal``."""
    free, xs, ys = grid_free_mask(obstacles, bounds, res)
    x0, _, y0, _ = bounds

    def cell(p):
        i = min(max(int((p[0] - x0) / res), 0), len(xs) - 1)
        j = min(max(int((p[1] - y0) / res), 0), len(ys) - 1)
        return i, j

    s, g = cell(start), cell(goal)
    if not free[s] or not free[g]:
        return False
    seen = np.zeros_like(free)
    seen[s] = True
    queue = deque([s])
    while queue:
        i, j = queue.popleft()
        if (i, j) == g:
            return True
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = i + di, j + dj
            if 0 <= ni < free.shape[0] and 0 <= nj < free.shape[1] and free[ni, nj] and not seen[ni, nj]:
                seen[ni, nj] = True
                queue.append((ni, nj))
    return False


def point_in_box(px, py, b, slack=0.0) -> bool:
    return bool(_inside(np.float64(px), np.float64(py), *_params(b), slack))
