"""Motion feasibility: reach test, goal-pose collision test and BiRRT.

The arm is modelled in end-effector workspace. A pose is reachable when its
distance from the base lies inside the reach annulus ``[r_min, r_max]``.
Transport happens above the table, so only objects taller than
``CARRY_CLEARANCE`` obstruct the path; the free space for path search is the
table rectangle intersected with the reach annulus, minus those obstacles.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .actions import GroundAction, applicable, format_action
from .geometry import EPS, OrientedBox2, Pose2, overlap, wrap_angle
from .metrics import Counters
from .world import PreconditionViolated, WorldState

TABLE_BOUNDS = (0.0, 1.0, -1.0, 1.0)
GRIPPER_WIDTH = 0.04
CARRY_CLEARANCE = 0.30

COLLISION_TEMPLATE = "The goal configuration is in collision with {object}."
UNREACHABLE_TEMPLATE = "The goal configuration has no feasible IK solution."
FEASIBLE_TEMPLATE = "The goal configuration is collision-free and reachable."


class NoPath(RuntimeError):
    pass


class FeedbackKind(enum.Enum):
    COLLISION = "collision"
    UNREACHABLE = "unreachable"
    FEASIBLE = "feasible"


@dataclass(frozen=True)
class MotionFeedback:
    kind: FeedbackKind
    obj: str | None = None

    def __post_init__(self):
        if (self.kind is FeedbackKind.COLLISION) != (self.obj is not None):
            raise ValueError("an object name goes with collision feedback only")

    @classmethod
    def collision(cls, name: str) -> MotionFeedback:
        return cls(FeedbackKind.COLLISION, name)

    @classmethod
    def unreachable(cls) -> MotionFeedback:
        return cls(FeedbackKind.UNREACHABLE)

    @classmethod
    def feasible(cls) -> MotionFeedback:
        return cls(FeedbackKind.FEASIBLE)

    @property
    def ok(self) -> bool:
        return self.kind is FeedbackKind.FEASIBLE

    @property
    def text(self) -> str:
        return render_feedback(self)


def render_feedback(f: MotionFeedback) -> str:
    if f.kind is FeedbackKind.COLLISION:
        return COLLISION_TEMPLATE.format(object=f.obj)
    if f.kind is FeedbackKind.UNREACHABLE:
        return UNREACHABLE_TEMPLATE
    return FEASIBLE_TEMPLATE


@dataclass(frozen=True)
class RrtParams:
    step_size: float = 0.05
    goal_bias: float = 0.1
    max_iterations: int = 50_000
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.goal_bias < 1:
            raise ValueError("goal_bias must be in (0, 1)")
        if self.step_size <= 0 or self.max_iterations <= 0:
            raise ValueError("step_size and max_iterations must be positive")


@dataclass(frozen=True)
class Trajectory:
    waypoints: tuple[Pose2, ...]
    action: GroundAction | None = None

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))

    def __len__(self):
        return len(self.waypoints)

    @property
    def length(self) -> float:
        w = self.waypoints
        return sum(w[i].distance_to(w[i + 1]) for i in range(len(w) - 1))


@dataclass
class FreeSpace:
    """Point membership in the planar free space used by the path search."""

    obstacles: list[OrientedBox2] = field(default_factory=list)
    bounds: tuple[float, float, float, float] = TABLE_BOUNDS
    reach: tuple[float, float] | None = None

    def __post_init__(self):
        n = len(self.obstacles)
        self._cx = np.array([b.center.x for b in self.obstacles]).reshape(n, 1)
        self._cy = np.array([b.center.y for b in self.obstacles]).reshape(n, 1)
        self._c = np.array([math.cos(b.center.theta) for b in self.obstacles]).reshape(n, 1)
        self._s = np.array([math.sin(b.center.theta) for b in self.obstacles]).reshape(n, 1)
        self._hx = np.array([b.half_x for b in self.obstacles]).reshape(n, 1) - EPS
        self._hy = np.array([b.half_y for b in self.obstacles]).reshape(n, 1) - EPS

    def sample_box(self) -> tuple[float, float, float, float]:
        x0, x1, y0, y1 = self.bounds
        if self.reach is not None:
            r = self.reach[1]
            x0, x1, y0, y1 = max(x0, -r), min(x1, r), max(y0, -r), min(y1, r)
        return x0, x1, y0, y1

    def free(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        x0, x1, y0, y1 = self.bounds
        ok = (x >= x0 - EPS) & (x <= x1 + EPS) & (y >= y0 - EPS) & (y <= y1 + EPS)
        if self.reach is not None:
            r = np.hypot(x, y)
            ok &= (r >= self.reach[0] - EPS) & (r <= self.reach[1] + EPS)
        if len(self.obstacles):
            dx = x[None, :] - self._cx
            dy = y[None, :] - self._cy
            lx = dx * self._c + dy * self._s
            ly = -dx * self._s + dy * self._c
            inside = (np.abs(lx) < self._hx) & (np.abs(ly) < self._hy)
            ok &= ~inside.any(axis=0)
        return ok

    def point_free(self, p) -> bool:
        return bool(self.free(np.asarray(p, dtype=float))[0])

    def segment_points(self, p: np.ndarray, q: np.ndarray, step: float) -> np.ndarray:
        """Waypoints plus segment midpoints of ``p -> q`` split into pieces <= step."""
        n = max(1, math.ceil(np.linalg.norm(q - p) / step - 1e-12))
        t = np.linspace(0.0, 1.0, 2 * n + 1)[:, None]
        return p[None, :] + t * (q - p)[None, :]

    def segment_free(self, p: np.ndarray, q: np.ndarray, step: float) -> bool:
        return bool(self.free(self.segment_points(p, q, step)).all())


def densify(path: list[np.ndarray], step: float) -> list[np.ndarray]:
    out = [path[0]]
    for p, q in zip(path, path[1:]):
        n = max(1, math.ceil(np.linalg.norm(q - p) / step - 1e-12))
        for i in range(1, n + 1):
            out.append(p + (q - p) * (i / n))
    return out


class _Tree:
    def __init__(self, root: np.ndarray, capacity: int):
        self.nodes = np.empty((capacity + 1, 2))
        self.nodes[0] = root
        self.parent = [-1]
        self.n = 1

    @property
    def root(self) -> np.ndarray:
        return self.nodes[0]

    def nearest(self, q: np.ndarray) -> int:
        d = self.nodes[: self.n] - q
        return int(np.argmin(np.einsum("ij,ij->i", d, d)))

    def add(self, p: np.ndarray, parent: int) -> int:
        if self.n == len(self.nodes):
            self.nodes = np.concatenate([self.nodes, np.empty_like(self.nodes)])
        self.nodes[self.n] = p
        self.parent.append(parent)
        self.n += 1
        return self.n - 1

    def path_to_root(self, i: int) -> list[np.ndarray]:
        out = []
        while i != -1:
            out.append(self.nodes[i].copy())
            i = self.parent[i]
        return out


_TRAPPED, _ADVANCED, _REACHED = 0, 1, 2


def _extend(tree: _Tree, q: np.ndarray, space: FreeSpace, step: float) -> tuple[int, int]:
    near = tree.nearest(q)
    p = tree.nodes[near]
    d = float(np.linalg.norm(q - p))
    if d < 1e-12:
        return _REACHED, near
    new = q if d <= step else p + (q - p) * (step / d)
    if not space.segment_free(p, new, step):
        return _TRAPPED, -1
    idx = tree.add(new.copy(), near)
    return (_REACHED if d <= step else _ADVANCED), idx


def _connect(tree: _Tree, q: np.ndarray, space: FreeSpace, step: float) -> int:
    while True:
        status, idx = _extend(tree, q, space, step)
        if status == _REACHED:
            return idx
        if status == _TRAPPED:
            return -1


def _shortcut(path: list[np.ndarray], space: FreeSpace, step: float, rng, attempts: int = 100):
    path = list(path)
    for _ in range(attempts):
        if len(path) < 3:
            break
        i, j = sorted(rng.choice(len(path), size=2, replace=False))
        if j - i < 2:
            continue
        if space.segment_free(path[i], path[j], step):
            path = path[: i + 1] + path[j:]
    return path


def birrt(start: Pose2, goal: Pose2, obstacles, params: RrtParams = RrtParams(), *,
          bounds=TABLE_BOUNDS, reach=None) -> list[Pose2]:
    """Bidirectional RRT (connect variant) between two planar poses.

    Returns waypoints spaced at most ``params.step_size`` apart whose points
    and segment midpoints are all free. Heading is interpolated along the
    path. Raises ``NoPath`` when the iteration budget runs out.
    """
    space = obstacles if isinstance(obstacles, FreeSpace) else FreeSpace(list(obstacles), bounds, reach)
    step = params.step_size
    s = np.array([start.x, start.y])
    g = np.array([goal.x, goal.y])
    if not space.point_free(s):
        raise NoPath("start is in collision")
    if not space.point_free(g):
        raise NoPath("goal is in collision")
    rng = np.random.default_rng(params.rng_seed)

    if space.segment_free(s, g, step):
        coarse = [s, g]
    else:
        coarse = _grow(s, g, space, params, rng)
    coarse = _shortcut(coarse, space, step, rng)
    pts = densify(coarse, step)
    arr = np.array(pts)
    if not (space.free(arr).all() and space.free(0.5 * (arr[1:] + arr[:-1])).all()):
        raise AssertionError("path re-validation failed")
    return _with_heading(pts, start.theta, goal.theta)


def _grow(s, g, space: FreeSpace, params: RrtParams, rng) -> list[np.ndarray]:
    step = params.step_size
    x0, x1, y0, y1 = space.sample_box()
    cap = min(params.max_iterations, 4096)
    ta, tb = _Tree(s, cap), _Tree(g, cap)
    from_start = True
    for _ in range(params.max_iterations):
        if rng.random() < params.goal_bias:
            q = tb.root.copy()
        else:
            q = np.array([rng.uniform(x0, x1), rng.uniform(y0, y1)])
        status, idx = _extend(ta, q, space, step)
        if status != _TRAPPED:
            other = _connect(tb, ta.nodes[idx], space, step)
            if other != -1:
                a_half = ta.path_to_root(idx)[::-1]
                b_half = tb.path_to_root(other)[1:]
                path = a_half + b_half
                return path if from_start else path[::-1]
        ta, tb = tb, ta
        from_start = not from_start
    raise NoPath(f"no path after {params.max_iterations} iterations")


def _with_heading(pts, theta0: float, theta1: float) -> list[Pose2]:
    seg = [float(np.linalg.norm(q - p)) for p, q in zip(pts, pts[1:])]
    total = sum(seg)
    dtheta = wrap_angle(theta1 - theta0)
    out = [Pose2(pts[0][0], pts[0][1], theta0)]
    acc = 0.0
    for p, d in zip(pts[1:], seg):
        acc += d
        frac = acc / total if total > 0 else 1.0
        out.append(Pose2(p[0], p[1], theta0 + frac * dtheta))
    if len(out) == 1:
        out.append(Pose2(pts[0][0], pts[0][1], theta1))
    out[-1] = Pose2(out[-1].x, out[-1].y, theta1)
    return out


def target_pose(s: WorldState, a: GroundAction) -> Pose2:
    if a.name == "place":
        return Pose2(a.params["x"], a.params["y"], a.params["theta"])
    return s.objects[a.obj].pose


def check_reachable(s: WorldState, target: Pose2) -> bool:
    r_min, r_max = s.reach
    d = s.robot_base.distance_to(target)
    return r_min - EPS <= d <= r_max + EPS


def check_goal_collision(s: WorldState, a: GroundAction) -> str | None:
    """Name of the first entity the goal footprint collides with, if any."""
    obj = s.objects[a.obj]
    if a.name == "place":
        footprint = OrientedBox2.from_shape(obj.shape, target_pose(s, a))
        others = s.footprints(exclude={obj.name})
        others += s.basket.walls()
    else:
        footprint = OrientedBox2(obj.pose, GRIPPER_WIDTH / 2, GRIPPER_WIDTH / 2)
        others = s.footprints(exclude={obj.name})
    for name, box in others:
        if overlap(footprint, box):
            return name
    return None


def transport_space(s: WorldState, a: GroundAction) -> FreeSpace:
    """Free space for moving the effector while executing ``a``."""
    carried = s.objects[s.holding] if s.holding else None
    margin = carried.shape.circumradius if carried is not None else 0.0
    obstacles = [
        box.inflated(margin) if margin else box
        for name, box in s.footprints(exclude={a.obj})
        if s.objects[name].shape.size_z > CARRY_CLEARANCE
    ]
    return FreeSpace(obstacles, TABLE_BOUNDS, s.reach)


def plan_motion(s: WorldState, a: GroundAction, params: RrtParams = RrtParams(),
                counters: Counters | None = None) -> tuple[Trajectory | None, MotionFeedback]:
    ok, reason = applicable(s, a)
    if not ok:
        raise PreconditionViolated(f"{format_action(a)}: {reason}")
    if counters is not None:
        counters.mp_calls += 1
    target = target_pose(s, a)
    if not check_reachable(s, target):
        return None, MotionFeedback.unreachable()
    hit = check_goal_collision(s, a)
    if hit is not None:
        return None, MotionFeedback.collision(hit)
    try:
        waypoints = birrt(s.effector, target, transport_space(s, a), params)
    except NoPath:
        return None, MotionFeedback.unreachable()
    return Trajectory(waypoints, a), MotionFeedback.feasible()


def trajectory_is_free(traj: Trajectory, space: FreeSpace) -> bool:
    """Post-hoc check of every waypoint and every segment midpoint."""
    pts = np.array([[w.x, w.y] for w in traj.waypoints])
    mids = 0.5 * (pts[1:] + pts[:-1])
    return bool(space.free(pts).all() and (len(mids) == 0 or space.free(mids).all()))
