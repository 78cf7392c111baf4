"""World state, the transition function and the goal check."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

from .actions import GroundAction, UnknownObject, applicable, format_action
from .geometry import BoxShape, OrientedBox2, Pose2, contains, overlap

ROBOT_BASE = Pose2(0.0, 0.0, 0.0)
HOME_POSE = Pose2(0.30, 0.0, 0.0)

SUCCESS_TEXT = "Goal satisfied: all target objects are fully inside the basket."


class PreconditionViolated(RuntimeError):
    """A transition or motion query was asked for an inapplicable action."""


class InvalidState(ValueError):
    pass


@dataclass(frozen=True)
class ObjectState:
    name: str
    shape: BoxShape
    pose: Pose2
    held: bool = False

    @property
    def footprint(self) -> OrientedBox2:
        return OrientedBox2.from_shape(self.shape, self.pose)


@dataclass(frozen=True)
class Basket:
    interior: OrientedBox2
    wall_thickness: float = 0.02

    def walls(self) -> list[tuple[str, OrientedBox2]]:
        """Wall rectangles in N, S, E, W order (local +y, -y, +x, -x)."""
        c = self.interior.center
        hx, hy, t = self.interior.half_x, self.interior.half_y, self.wall_thickness
        (ux, uy), (vx, vy) = self.interior.axes()

        def at(lx, ly, half_x, half_y):
            pose = Pose2(c.x + lx * ux + ly * vx, c.y + lx * uy + ly * vy, c.theta)
            return OrientedBox2(pose, half_x, half_y)

        return [
            ("basket_wall_N", at(0.0, hy + t / 2, hx + t, t / 2)),
            ("basket_wall_S", at(0.0, -hy - t / 2, hx + t, t / 2)),
            ("basket_wall_E", at(hx + t / 2, 0.0, t / 2, hy)),
            ("basket_wall_W", at(-hx - t / 2, 0.0, t / 2, hy)),
        ]

    @property
    def outer(self) -> OrientedBox2:
        t = self.wall_thickness
        return OrientedBox2(self.interior.center, self.interior.half_x + t, self.interior.half_y + t)


@dataclass(frozen=True)
class WorldState:
    objects: Mapping[str, ObjectState]
    basket: Basket
    reach: tuple[float, float] = (0.10, 0.90)
    holding: str | None = None
    robot_base: Pose2 = ROBOT_BASE
    effector: Pose2 = HOME_POSE

    def __post_init__(self):
        objs = self.objects
        if not isinstance(objs, Mapping):
            objs = {o.name: o for o in objs}
        object.__setattr__(self, "objects", MappingProxyType(dict(sorted(objs.items()))))

    def with_objects(self, **changes: ObjectState) -> WorldState:
        objs = dict(self.objects)
        objs.update(changes)
        return replace(self, objects=objs)

    def footprints(self, exclude=()) -> list[tuple[str, OrientedBox2]]:
        """Footprints of objects resting on the table, sorted by name."""
        return [(n, o.footprint) for n, o in self.objects.items() if not o.held and n not in exclude]

    def validate(self) -> None:
        held = [n for n, o in self.objects.items() if o.held]
        if len(held) > 1:
            raise InvalidState(f"more than one held object: {held}")
        if (held[0] if held else None) != self.holding:
            raise InvalidState(f"holding={self.holding!r} but held flags say {held}")
        for name, obj in self.objects.items():
            if obj.name != name:
                raise InvalidState(f"object keyed {name!r} is named {obj.name!r}")
        prints = self.footprints()
        for i, (na, fa) in enumerate(prints):
            for nb, fb in prints[i + 1:]:
                if overlap(fa, fb):
                    raise InvalidState(f"{na} overlaps {nb}")


@dataclass(frozen=True)
class GoalSpec:
    target_objects: tuple[str, ...]
    container: str = "basket"

    def __post_init__(self):
        object.__setattr__(self, "target_objects", tuple(self.target_objects))
        if not self.target_objects:
            raise ValueError("goal needs at least one target object")


@dataclass(frozen=True)
class TaskFeedback:
    satisfied: bool
    text: str
    offending: tuple[str, ...] = field(default=())


def transition(s: WorldState, a: GroundAction, tau=None) -> WorldState:
    ok, reason = applicable(s, a)
    if not ok:
        raise PreconditionViolated(f"{format_action(a)}: {reason}")
    obj = s.objects[a.obj]
    if a.name == "pick":
        return replace(s.with_objects(**{obj.name: replace(obj, held=True)}), holding=obj.name, effector=obj.pose)
    if a.name == "place":
        pose = Pose2(a.params["x"], a.params["y"], a.params["theta"])
        placed = replace(obj, held=False, pose=pose)
        return replace(s.with_objects(**{obj.name: placed}), holding=None, effector=pose)
    raise PreconditionViolated(f"no transition for {a.name}")


def goal_satisfied(s: WorldState, goal: GoalSpec) -> tuple[bool, TaskFeedback]:
    for name in goal.target_objects:
        if name not in s.objects:
            raise UnknownObject(name)
    bad = []
    for name in goal.target_objects:
        obj = s.objects[name]
        if obj.held or not contains(s.basket.interior, obj.footprint):
            bad.append(name)
    targets = list(goal.target_objects)
    for i, na in enumerate(targets):
        for nb in targets[i + 1:]:
            a, b = s.objects[na], s.objects[nb]
            if not a.held and not b.held and overlap(a.footprint, b.footprint):
                bad.extend(n for n in (na, nb) if n not in bad)
    if not bad:
        return True, TaskFeedback(True, SUCCESS_TEXT)
    names = ", ".join(sorted(bad))
    return False, TaskFeedback(False, f"Goal not satisfied: {names} not fully inside the basket.", tuple(sorted(bad)))


def _f(v: float) -> str:
    out = f"{v:.2f}"
    return "0.00" if out == "-0.00" else out


def textualize_state(s: WorldState) -> str:
    b = s.basket.interior
    lo_x, hi_x = b.center.x - b.half_x, b.center.x + b.half_x
    lo_y, hi_y = b.center.y - b.half_y, b.center.y + b.half_y
    lines = [
        f"robot base at ({_f(s.robot_base.x)}, {_f(s.robot_base.y)}), reach radius {_f(s.reach[0])} to {_f(s.reach[1])}",
        f"basket interior: center ({_f(b.center.x)}, {_f(b.center.y)}), theta {_f(b.center.theta)}, "
        f"x range [{_f(lo_x)}, {_f(hi_x)}], y range [{_f(lo_y)}, {_f(hi_y)}], wall thickness {_f(s.basket.wall_thickness)}",
        f"gripper holding: {s.holding or 'nothing'}",
    ]
    for name, o in s.objects.items():
        where = "held by gripper" if o.held else "on table"
        lines.append(
            f"{name}: size ({_f(o.shape.size_x)}, {_f(o.shape.size_y)}, {_f(o.shape.size_z)}), "
            f"pose (x={_f(o.pose.x)}, y={_f(o.pose.y)}, theta={_f(o.pose.theta)}), {where}"
        )
    return "\n".join(lines)
