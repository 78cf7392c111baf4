"""Planar geometry for tabletop footprints.

Everything here is a 2D top-down view: poses are (x, y, theta) and boxes are
oriented rectangles. Touching boundaries (zero penetration, up to ``EPS``)
never count as a collision, so a box may sit flush against a wall.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS = 1e-9


def wrap_angle(theta: float) -> float:
    """Map an angle onto (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class Pose2:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"non-finite pose {self.x, self.y, self.theta}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    def distance_to(self, other: Pose2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.theta)


@dataclass(frozen=True)
class BoxShape:
    size_x: float
    size_y: float
    size_z: float

    def __post_init__(self):
        if min(self.size_x, self.size_y, self.size_z) <= 0:
            raise ValueError(f"box dimensions must be positive, got {self}")

    @property
    def footprint_area(self) -> float:
        return self.size_x * self.size_y

    @property
    def circumradius(self) -> float:
        return 0.5 * math.hypot(self.size_x, self.size_y)


@dataclass(frozen=True)
class OrientedBox2:
    center: Pose2
    half_x: float
    half_y: float

    def __post_init__(self):
        if not (self.half_x > 0 and self.half_y > 0):
            raise ValueError(f"half extents must be positive, got {self.half_x}, {self.half_y}")

    @classmethod
    def from_shape(cls, shape: BoxShape, pose: Pose2) -> OrientedBox2:
        return cls(pose, 0.5 * shape.size_x, 0.5 * shape.size_y)

    @property
    def area(self) -> float:
        return 4.0 * self.half_x * self.half_y

    def axes(self) -> tuple[tuple[float, float], tuple[float, float]]:
        c, s = math.cos(self.center.theta), math.sin(self.center.theta)
        return (c, s), (-s, c)

    def to_local(self, px, py):
        """World points -> box frame. Works on floats and numpy arrays."""
        (ux, uy), (vx, vy) = self.axes()
        dx = px - self.center.x
        dy = py - self.center.y
        return dx * ux + dy * uy, dx * vx + dy * vy

    def contains_point(self, px: float, py: float, eps: float = EPS) -> bool:
        lx, ly = self.to_local(px, py)
        return abs(lx) <= self.half_x + eps and abs(ly) <= self.half_y + eps

    def inflated(self, margin: float) -> OrientedBox2:
        return OrientedBox2(self.center, self.half_x + margin, self.half_y + margin)


def corners(b: OrientedBox2) -> list[tuple[float, float]]:
    """Vertices in counter-clockwise order, starting at local (+hx, +hy)."""
    (ux, uy), (vx, vy) = b.axes()
    out = []
    for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1)):
        lx, ly = sx * b.half_x, sy * b.half_y
        out.append((b.center.x + lx * ux + ly * vx, b.center.y + lx * uy + ly * vy))
    return out


def _project(pts, axis) -> tuple[float, float]:
    vals = [p[0] * axis[0] + p[1] * axis[1] for p in pts]
    return min(vals), max(vals)


def separation(a: OrientedBox2, b: OrientedBox2) -> float:
    """Signed separating-axis margin.

    Positive: the largest gap along any of the four edge normals (boxes are
    apart). Negative: minus the smallest interval overlap (penetration).
    """
    ca, cb = corners(a), corners(b)
    best = -math.inf
    for axis in (*a.axes(), *b.axes()):
        lo_a, hi_a = _project(ca, axis)
        lo_b, hi_b = _project(cb, axis)
        gap = max(lo_b - hi_a, lo_a - hi_b)
        best = max(best, gap)
    return best


def overlap(a: OrientedBox2, b: OrientedBox2, eps: float = EPS) -> bool:
    """True iff the interiors intersect by more than ``eps``."""
    return separation(a, b) < -eps


def contains(outer: OrientedBox2, inner: OrientedBox2, eps: float = EPS) -> bool:
    return all(outer.contains_point(x, y, eps) for x, y in corners(inner))


def points_in_any(px: np.ndarray, py: np.ndarray, boxes, eps: float = EPS) -> np.ndarray:
    """Vectorized strict-interior membership of points in a list of boxes."""
    hit = np.zeros(np.shape(px), dtype=bool)
    for b in boxes:
        lx, ly = b.to_local(px, py)
        hit |= (np.abs(lx) < b.half_x - eps) & (np.abs(ly) < b.half_y - eps)
    return hit
