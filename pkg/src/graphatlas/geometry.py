"""Plane geometry primitives shared by layout, placement, and the spatial index.

All predicates use closed-set semantics: shapes that merely touch count as
intersecting. Orientation signs are computed with a float64 filter and an
exact rational fallback, so boundary cases (collinear points, endpoints
exactly on a rectangle side) are decided correctly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidParameterError

__all__ = [
    "Point",
    "Segment",
    "Rect",
    "orientation",
    "segments_intersect",
    "segment_intersects_rect",
    "rects_disjoint",
]


@dataclass(frozen=True, slots=True)
class Point:
    x: float
    y: float


@dataclass(frozen=True, slots=True)
class Segment:
    a: Point
    b: Point


@dataclass(frozen=True, slots=True)
class Rect:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise InvalidParameterError(
                f"inverted rect [{self.x_min}, {self.x_max}] x [{self.y_min}, {self.y_max}]"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def center(self) -> Point:
        return Point((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def intersects(self, other: "Rect") -> bool:
        return (
            self.x_min <= other.x_max
            and other.x_min <= self.x_max
            and self.y_min <= other.y_max
            and other.y_min <= self.y_max
        )

    def expanded(self, d: float) -> "Rect":
        return Rect(self.x_min - d, self.y_min - d, self.x_max + d, self.y_max + d)

    def union(self, other: "Rect") -> "Rect":
        return Rect(
            min(self.x_min, other.x_min),
            min(self.y_min, other.y_min),
            max(self.x_max, other.x_max),
            max(self.y_max, other.y_max),
        )

    def translated(self, dx: float, dy: float) -> "Rect":
        return Rect(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)


def rects_disjoint(a: Rect, b: Rect, gap: float = 0.0) -> bool:
    """True iff `a` and `b`, each padded by gap/2 per side, do not intersect.

    Closed-rectangle intersection: padded rects that merely touch count as
    intersecting, which guarantees a visible separation of at least `gap`.
    """
    if gap < 0:
        raise InvalidParameterError("gap must be non-negative", param="gap")
    half = gap / 2.0
    return not a.expanded(half).intersects(b.expanded(half))


# Stage-A relative error bound for the float64 orientation determinant
# (Shewchuk's ccwerrboundA); below it the sign cannot be trusted.
_ORIENT_EPS = 3.3306690738754716e-16


def orientation(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> int:
    """Sign of the cross product (b-a) x (c-a): +1 left turn, -1 right, 0 collinear.

    Float64 with an error-bound filter; falls back to exact rational
    arithmetic when the determinant is too small to trust.
    """
    detleft = (bx - ax) * (cy - ay)
    detright = (by - ay) * (cx - ax)
    det = detleft - detright
    errbound = _ORIENT_EPS * (abs(detleft) + abs(detright))
    if det > errbound:
        return 1
    if det < -errbound:
        return -1
    det_exact = (Fraction(bx) - Fraction(ax)) * (Fraction(cy) - Fraction(ay)) - (
        Fraction(by) - Fraction(ay)
    ) * (Fraction(cx) - Fraction(ax))
    if det_exact > 0:
        return 1
    if det_exact < 0:
        return -1
    return 0


def _collinear_point_on(ax: float, ay: float, bx: float, by: float, px: float, py: float) -> bool:
    # Assumes p collinear with segment ab; bbox membership then decides.
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def segments_intersect(
    ax: float, ay: float, bx: float, by: float,
    cx: float, cy: float, dx: float, dy: float,
) -> bool:
    """Closed intersection test for segments ab and cd (touching counts)."""
    d1 = orientation(cx, cy, dx, dy, ax, ay)
    d2 = orientation(cx, cy, dx, dy, bx, by)
    d3 = orientation(ax, ay, bx, by, cx, cy)
    d4 = orientation(ax, ay, bx, by, dx, dy)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _collinear_point_on(cx, cy, dx, dy, ax, ay):
        return True
    if d2 == 0 and _collinear_point_on(cx, cy, dx, dy, bx, by):
        return True
    if d3 == 0 and _collinear_point_on(ax, ay, bx, by, cx, cy):
        return True
    if d4 == 0 and _collinear_point_on(ax, ay, bx, by, dx, dy):
        return True
    return False


def segment_intersects_rect(seg: Segment, rect: Rect) -> bool:
    """True iff the closed segment and the closed rectangle share a point.

    Endpoint-inside test first, then the segment against each rectangle side.
    """
    ax, ay, bx, by = seg.a.x, seg.a.y, seg.b.x, seg.b.y
    for v in (ax, ay, bx, by):
        if not math.isfinite(v):
            raise InvalidParameterError("segment coordinates must be finite")
    if rect.contains_point(ax, ay) or rect.contains_point(bx, by):
        return True
    x0, y0, x1, y1 = rect.x_min, rect.y_min, rect.x_max, rect.y_max
    sides = (
        (x0, y0, x1, y0),
        (x1, y0, x1, y1),
        (x1, y1, x0, y1),
        (x0, y1, x0, y0),
    )
    return any(segments_intersect(ax, ay, bx, by, *side) for side in sides)
