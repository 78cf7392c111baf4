"""Placement samplers: uniform random and a greedy grid packer."""
from __future__ import annotations

import itertools

import numpy as np

from ..actions import ActionSchema
from ..geometry import EPS, OrientedBox2, Pose2, contains, overlap

GRID = 0.01


def sample_params_random(schema: ActionSchema, region: OrientedBox2, rng: np.random.Generator) -> dict[str, float]:
    """Uniform (x, y) inside ``region`` by rejection, uniform theta over the schema interval."""
    if schema.name != "place":
        raise ValueError(f"cannot sample parameters for {schema.name}")
    b = region
    ext_x = abs(b.half_x * np.cos(b.center.theta)) + abs(b.half_y * np.sin(b.center.theta))
    ext_y = abs(b.half_x * np.sin(b.center.theta)) + abs(b.half_y * np.cos(b.center.theta))
    while True:
        x = rng.uniform(b.center.x - ext_x, b.center.x + ext_x)
        y = rng.uniform(b.center.y - ext_y, b.center.y + ext_y)
        if b.contains_point(x, y, eps=0.0):
            break
    lo, hi = schema.interval("theta")
    x_lo, x_hi = schema.interval("x")
    y_lo, y_hi = schema.interval("y")
    return {
        "x": float(np.clip(x, x_lo, x_hi)),
        "y": float(np.clip(y, y_lo, y_hi)),
        "theta": float(rng.uniform(lo, hi)),
    }


# (flip u, flip v, rows along u first)
_SCANS = list(itertools.product((1, -1), (1, -1), (True, False)))


def grid_packing(state, targets, grid: float = GRID) -> dict[str, Pose2] | None:
    """Greedy bottom-left packing of ``targets`` into the basket.

    Objects go largest footprint first onto a world grid of spacing ``grid``
    (so every pose survives two-decimal formatting unchanged). Each accepted
    pose is re-checked with the exact predicates: contained in the basket, no
    overlap with already packed or other resting objects, and reachable.
    Eight scan orders (start corner x row/column major) are tried in turn.
    Returns ``None`` if none of them fits everything.
    """
    basket = state.basket.interior
    theta = round(basket.center.theta, 2)
    ext = basket.half_x + basket.half_y
    ks_x = np.arange(np.floor((basket.center.x - ext) / grid), np.ceil((basket.center.x + ext) / grid) + 1)
    ks_y = np.arange(np.floor((basket.center.y - ext) / grid), np.ceil((basket.center.y + ext) / grid) + 1)
    gx, gy = np.meshgrid(ks_x * grid, ks_y * grid, indexing="ij")
    gx, gy = np.round(gx.ravel(), 2), np.round(gy.ravel(), 2)
    lu, lv = basket.to_local(gx, gy)
    r = np.hypot(gx - state.robot_base.x, gy - state.robot_base.y)
    reach_ok = (r >= state.reach[0]) & (r <= state.reach[1])

    order = sorted(targets, key=lambda n: (-state.objects[n].shape.footprint_area, n))
    others = [box for name, box in state.footprints(exclude=set(targets))]
    iu, iv = np.round(lu / grid).astype(int), np.round(lv / grid).astype(int)

    for su, sv, rows_first in _SCANS:
        keys = (sv * iv, su * iu) if rows_first else (su * iu, sv * iv)
        scan = np.lexsort((keys[1], keys[0]))
        placed = _pack_once(state, order, others, gx[scan], gy[scan], lu[scan], lv[scan],
                            reach_ok[scan], basket, theta)
        if placed is not None:
            return placed
    return None


def _pack_once(state, order, others, gx, gy, lu, lv, reach_ok, basket, theta):
    placed: dict[str, Pose2] = {}
    boxes: list[tuple[float, float, float, float]] = []
    for name in order:
        shape = state.objects[name].shape
        hx, hy = shape.size_x / 2, shape.size_y / 2
        ok = reach_ok & (np.abs(lu) + hx <= basket.half_x + 1e-6) & (np.abs(lv) + hy <= basket.half_y + 1e-6)
        for (pu, pv, phx, phy) in boxes:
            ok &= ~((np.abs(lu - pu) < hx + phx - 1e-6) & (np.abs(lv - pv) < hy + phy - 1e-6))
        chosen = None
        for i in np.flatnonzero(ok):
            pose = Pose2(gx[i], gy[i], theta)
            fp = OrientedBox2(pose, hx, hy)
            if not contains(basket, fp):
                continue
            if any(overlap(fp, OrientedBox2(p, state.objects[n].shape.size_x / 2, state.objects[n].shape.size_y / 2))
                   for n, p in placed.items()):
                continue
            if any(overlap(fp, o) for o in others):
                continue
            chosen = i
            placed[name] = pose
            break
        if chosen is None:
            return None
        boxes.append((lu[chosen], lv[chosen], hx, hy))
    return placed


def grid_pack_check(state, placement: dict[str, Pose2]) -> bool:
    """Exact re-check of a packing, independent of the scan bookkeeping."""
    basket = state.basket.interior
    fps = {n: OrientedBox2.from_shape(state.objects[n].shape, p) for n, p in placement.items()}
    names = sorted(fps)
    for n in names:
        d = placement[n].distance_to(state.robot_base)
        if not (state.reach[0] - EPS <= d <= state.reach[1] + EPS) or not contains(basket, fps[n]):
            return False
    return not any(overlap(fps[a], fps[b]) for a, b in itertools.combinations(names, 2))
