"""Box-packing scenarios and their text file format.

Setting 1 keeps one 0.40 m basket and grows the object set (occupancy 30%,
55%, 75% of the basket floor). Setting 2 keeps the largest object set and
grows the basket until part of it falls outside the robot's reach.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml
from scipy.optimize import brentq

from ..geometry import BoxShape, OrientedBox2, Pose2, corners, overlap
from ..world import Basket, GoalSpec, ObjectState, WorldState

FORMAT_VERSION = 1
TABLE = (0.0, 1.0, -1.0, 1.0)
REACH = (0.10, 0.90)
WALL = 0.02
BASKET_CENTER = (0.50, 0.00)
BASKET_SIZE = 0.40

OBJECT_SETS = {
    "easy": [
        ("red_box", (0.20, 0.10, 0.06)),
        ("blue_box", (0.16, 0.10, 0.06)),
        ("green_box", (0.12, 0.10, 0.06)),
    ],
    "medium": [
        ("red_box", (0.20, 0.14, 0.06)),
        ("blue_box", (0.20, 0.10, 0.06)),
        ("green_box", (0.10, 0.20, 0.06)),
        ("yellow_box", (0.20, 0.10, 0.06)),
    ],
    "hard": [
        ("red_box", (0.20, 0.14, 0.06)),
        ("blue_box", (0.20, 0.14, 0.06)),
        ("green_box", (0.20, 0.10, 0.06)),
        ("yellow_box", (0.20, 0.10, 0.06)),
        ("purple_box", (0.12, 0.10, 0.06)),
        ("orange_box", (0.12, 0.10, 0.06)),
    ],
}
OCCUPANCY_TARGETS = {"easy": 0.30, "medium": 0.55, "hard": 0.75}
SETTING2_WIDTHS = {"small": 0.40, "medium": 0.55, "large": 0.70}
REACHABLE_TARGETS = {"small": 1.00, "medium": 0.70, "large": 0.50}


class GenerationFailure(RuntimeError):
    pass


class ScenarioFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    shape: BoxShape
    pose: Pose2


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    objects: tuple[ObjectSpec, ...]
    basket: Basket
    goal: GoalSpec
    reach: tuple[float, float] = REACH
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def initial_state(self) -> WorldState:
        objs = {o.name: ObjectState(o.name, o.shape, o.pose) for o in self.objects}
        return WorldState(objs, self.basket, tuple(self.reach))

    def validate(self) -> None:
        s = self.initial_state()
        s.validate()
        for name in self.goal.target_objects:
            if name not in s.objects:
                raise ScenarioFormatError(f"goal names unknown object {name!r}")
        outer = self.basket.outer
        for o in self.objects:
            fp = OrientedBox2.from_shape(o.shape, o.pose)
            if overlap(fp, outer):
                raise ScenarioFormatError(f"{o.name} starts inside or on the basket")
            d = o.pose.norm()
            if not self.reach[0] <= d <= self.reach[1]:
                raise ScenarioFormatError(f"{o.name} starts out of reach ({d:.3f} m)")

    @property
    def occupancy(self) -> float:
        return sum(o.shape.footprint_area for o in self.objects) / self.basket.interior.area

    def to_dict(self) -> dict:
        b = self.basket.interior
        return {
            "format": FORMAT_VERSION,
            "name": self.name,
            "seed": self.seed,
            "reach": [float(self.reach[0]), float(self.reach[1])],
            "basket": {
                "center": list(b.center.as_tuple()),
                "size": [2 * b.half_x, 2 * b.half_y],
                "wall_thickness": self.basket.wall_thickness,
            },
            "objects": [
                {
                    "name": o.name,
                    "size": [o.shape.size_x, o.shape.size_y, o.shape.size_z],
                    "pose": list(o.pose.as_tuple()),
                }
                for o in self.objects
            ],
            "goal": {"targets": list(self.goal.target_objects), "container": self.goal.container},
        }

    def to_text(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioSpec:
        if d.get("format") != FORMAT_VERSION:
            raise ScenarioFormatError(f"unsupported scenario format {d.get('format')!r}")
        try:
            b = d["basket"]
            basket = Basket(
                OrientedBox2(Pose2(*b["center"]), b["size"][0] / 2, b["size"][1] / 2),
                b.get("wall_thickness", WALL),
            )
            objects = tuple(ObjectSpec(o["name"], BoxShape(*o["size"]), Pose2(*o["pose"])) for o in d["objects"])
            goal = GoalSpec(tuple(d["goal"]["targets"]), d["goal"].get("container", "basket"))
            return cls(d["name"], objects, basket, goal, tuple(d.get("reach", REACH)), int(d.get("seed", 0)))
        except (KeyError, TypeError, IndexError) as exc:
            raise ScenarioFormatError(f"bad scenario document: {exc!r}") from exc

    @classmethod
    def from_text(cls, text: str) -> ScenarioSpec:
        return cls.from_dict(yaml.safe_load(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> ScenarioSpec:
        return cls.from_text(Path(path).read_text())


def _place_objects(shapes, basket: Basket, reach, rng: np.random.Generator, attempts: int = 10_000):
    """Collision-free, reachable initial poses on the table, outside the basket."""
    keep_out = basket.outer.inflated(0.03)
    placed: list[ObjectSpec] = []
    tries = 0
    x0, x1, y0, y1 = TABLE
    for name, shape in shapes:
        while True:
            tries += 1
            if tries > attempts:
                raise GenerationFailure(f"could not place {name} after {attempts} attempts")
            pose = Pose2(round(rng.uniform(x0, x1), 2), round(rng.uniform(y0, y1), 2),
                         round(rng.uniform(-1.57, 1.57), 2))
            fp = OrientedBox2.from_shape(shape, pose)
            d = pose.norm()
            if not (reach[0] + 0.10 <= d <= reach[1] - 0.05):
                continue
            xs = [c[0] for c in corners(fp)]
            ys = [c[1] for c in corners(fp)]
            if min(xs) < x0 or max(xs) > x1 or min(ys) < y0 or max(ys) > y1:
                continue
            if overlap(fp, keep_out):
                continue
            if any(overlap(fp.inflated(0.01), OrientedBox2.from_shape(p.shape, p.pose)) for p in placed):
                continue
            placed.append(ObjectSpec(name, shape, pose))
            break
    return tuple(placed)


def _shapes(difficulty: str):
    if difficulty not in OBJECT_SETS:
        raise ValueError(f"unknown difficulty {difficulty!r}")
    return [(n, BoxShape(*dims)) for n, dims in OBJECT_SETS[difficulty]]


def _square_basket(cx: float, cy: float, width: float) -> Basket:
    return Basket(OrientedBox2(Pose2(cx, cy, 0.0), width / 2, width / 2), WALL)


def make_setting1(difficulty: str, seed: int = 0) -> ScenarioSpec:
    shapes = _shapes(difficulty)
    basket = _square_basket(*BASKET_CENTER, BASKET_SIZE)
    rng = np.random.default_rng([1, seed])
    objects = _place_objects(shapes, basket, REACH, rng)
    return ScenarioSpec(
        f"setting1-{difficulty}", objects, basket, GoalSpec(tuple(n for n, _ in shapes)), REACH, seed,
        {"setting": 1, "level": difficulty},
    )


# -- reachable fraction of an axis-aligned basket -------------------------------------------


def _chord_integral(r: float, c: float, x0: float, x1: float) -> float:
    """Integral over [x0, x1] of min(sqrt(r^2 - x^2), c), zero outside |x| <= r, c >= 0."""
    x0, x1 = max(x0, -r), min(x1, r)
    if x1 <= x0:
        return 0.0

    def G(x):
        x = min(max(x, -r), r)
        return 0.5 * (x * math.sqrt(max(r * r - x * x, 0.0)) + r * r * math.asin(x / r))

    w = math.sqrt(r * r - c * c) if c < r else 0.0
    cuts = sorted({x0, x1, *(v for v in (-w, w) if x0 < v < x1)})
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        mid = 0.5 * (lo + hi)
        if c < r and abs(mid) <= w:
            total += c * (hi - lo)
        else:
            total += G(hi) - G(lo)
    return total


def _disk_rect_area(r: float, x0: float, x1: float, y0: float, y1: float) -> float:
    """Area of the rectangle [x0,x1]x[y0,y1] inside the disk of radius r at the origin."""
    def band(a, b):  # 0 <= a <= b
        if b <= a:
            return 0.0
        return _chord_integral(r, b, x0, x1) - _chord_integral(r, a, x0, x1)

    return band(max(y0, 0.0), max(y1, 0.0)) + band(max(-y1, 0.0), max(-y0, 0.0))


def reachable_fraction(basket: Basket, reach=REACH) -> float:
    """Exact share of the basket floor inside the reach annulus (axis-aligned basket)."""
    b = basket.interior
    if abs(b.center.theta) > 1e-12:
        raise ValueError("closed form needs an axis-aligned basket")
    x0, x1 = b.center.x - b.half_x, b.center.x + b.half_x
    y0, y1 = b.center.y - b.half_y, b.center.y + b.half_y
    inside = _disk_rect_area(reach[1], x0, x1, y0, y1) - _disk_rect_area(reach[0], x0, x1, y0, y1)
    return inside / b.area


def reachable_fraction_grid(basket: Basket, reach=REACH, spacing: float = 0.01) -> float:
    """Share of grid cell centres (``spacing`` apart) in the basket that are reachable."""
    b = basket.interior
    nu, nv = max(1, round(2 * b.half_x / spacing)), max(1, round(2 * b.half_y / spacing))
    u = (np.arange(nu) + 0.5) / nu * 2 * b.half_x - b.half_x
    v = (np.arange(nv) + 0.5) / nv * 2 * b.half_y - b.half_y
    uu, vv = np.meshgrid(u, v, indexing="ij")
    c, s = math.cos(b.center.theta), math.sin(b.center.theta)
    x = b.center.x + uu * c - vv * s
    y = b.center.y + uu * s + vv * c
    r = np.hypot(x, y)
    return float(((r >= reach[0]) & (r <= reach[1])).mean())


def setting2_basket(size: str) -> Basket:
    width = SETTING2_WIDTHS[size]
    target = REACHABLE_TARGETS[size]
    near_x = BASKET_CENTER[0] - BASKET_SIZE / 2
    cx = near_x + width / 2
    if target >= 1.0:
        return _square_basket(cx, 0.0, width)
    hi = TABLE[3] - width / 2
    f = lambda cy: reachable_fraction(_square_basket(cx, cy, width)) - target  # noqa: E731
    if not f(0.0) > 0 > f(hi):
        raise GenerationFailure(f"cannot position a {width} m basket at {target:.0%} reachability")
    cy = brentq(f, 0.0, hi, xtol=1e-12)
    return _square_basket(cx, cy, width)


def make_setting2(size: str, seed: int = 0) -> ScenarioSpec:
    if size not in SETTING2_WIDTHS:
        raise ValueError(f"unknown basket size {size!r}")
    shapes = _shapes("hard")
    basket = setting2_basket(size)
    rng = np.random.default_rng([1, seed])
    objects = _place_objects(shapes, basket, REACH, rng)
    return ScenarioSpec(
        f"setting2-{size}", objects, basket, GoalSpec(tuple(n for n, _ in shapes)), REACH, seed,
        {"setting": 2, "level": size},
    )


SCENARIOS = {
    "setting1-easy": lambda seed: make_setting1("easy", seed),
    "setting1-medium": lambda seed: make_setting1("medium", seed),
    "setting1-hard": lambda seed: make_setting1("hard", seed),
    "setting2-small": lambda seed: make_setting2("small", seed),
    "setting2-medium": lambda seed: make_setting2("medium", seed),
    "setting2-large": lambda seed: make_setting2("large", seed),
}


def make_scenario(name: str, seed: int = 0) -> ScenarioSpec:
    try:
        return SCENARIOS[name](seed)
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None
