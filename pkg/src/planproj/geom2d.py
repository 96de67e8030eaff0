"""Exact-ish 2D geometry for trigger regions and planned paths.

Coordinates are centimeters in the building frame.  Regions are closed
under union, intersection, and complement; the primitive leaves are
axis-aligned rectangles, disks, and strict axis-aligned half-planes.
Membership at boundaries: rectangles and disks include their boundary,
half-planes are strict (use a Complement to get the non-strict side).

Crossing computation never walks the path numerically.  For each segment
it solves for the parameters where any primitive leaf's boundary is met,
then samples membership between consecutive candidates; the composite's
membership can only change at such a candidate, so every flip is found
at its exact arclength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Union as _U

EPS_ARC = 1e-9  # crossings closer than this (cm of arclength) collapse


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")


def distance(a: Point, b: Point) -> float:
    """Euclidean distance between two points."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class Polyline:
    """A planned path: two or more vertices, consecutive ones distinct."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise ValueError("polyline needs at least two vertices")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if a == b:
                raise ValueError(f"repeated consecutive vertex {a}")

    @cached_property
    def segment_lengths(self) -> tuple[float, ...]:
        return tuple(distance(a, b) for a, b in zip(self.vertices, self.vertices[1:]))

    @cached_property
    def length(self) -> float:
        return sum(self.segment_lengths)

    @cached_property
    def vertex_arclengths(self) -> tuple[float, ...]:
        """Cumulative arclength at each vertex, starting at 0.0."""
        acc, out = 0.0, [0.0]
        for s in self.segment_lengths:
            acc += s
            out.append(acc)
        return tuple(out)

    def point_at(self, arclength: float) -> Point:
        """Point at a given arclength, clamped to the path's ends."""
        if arclength <= 0.0:
            return self.vertices[0]
        if arclength >= self.length:
            return self.vertices[-1]
        marks = self.vertex_arclengths
        for i, s in enumerate(self.segment_lengths):
            if arclength <= marks[i + 1] or i == len(self.segment_lengths) - 1:
                t = (arclength - marks[i]) / s
                a, b = self.vertices[i], self.vertices[i + 1]
                return Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        return self.vertices[-1]


@dataclass(frozen=True)
class AxisRect:
    """Closed axis-aligned rectangle [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("rectangle bounds must satisfy xmin<xmax and ymin<ymax")


@dataclass(frozen=True)
class Disk:
    """Closed disk."""

    center: Point
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"disk radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class HalfPlane:
    """Strict half-plane: coordinate < bound ('below') or > bound ('above')."""

    axis: str  # 'x' | 'y'
    bound: float
    side: str  # 'below' | 'above'

    def __post_init__(self):
        if self.axis not in ("x", "y") or self.side not in ("below", "above"):
            raise ValueError(f"bad half-plane spec {self.axis!r}/{self.side!r}")


@dataclass(frozen=True)
class Union:
    parts: tuple["Region", ...]


@dataclass(frozen=True)
class Intersection:
    parts: tuple["Region", ...]


@dataclass(frozen=True)
class Complement:
    part: "Region"


Region = _U[AxisRect, Disk, HalfPlane, Union, Intersection, Complement]


def point_in_region(p: Point, region: Region) -> bool:
    """Membership test, with the boundary conventions noted in the module doc."""
    if isinstance(region, AxisRect):
        return region.xmin <= p.x <= region.xmax and region.ymin <= p.y <= region.ymax
    if isinstance(region, Disk):
        return distance(p, region.center) <= region.radius
    if isinstance(region, HalfPlane):
        v = p.x if region.axis == "x" else p.y
        return v < region.bound if region.side == "below" else v > region.bound
    if isinstance(region, Union):
        return any(point_in_region(p, r) for r in region.parts)
    if isinstance(region, Intersection):
        return all(point_in_region(p, r) for r in region.parts)
    if isinstance(region, Complement):
        return not point_in_region(p, region.part)
    raise TypeError(f"not a region: {region!r}")


@dataclass(frozen=True)
class Crossing:
    """A membership flip along a path.

    kind is 'enter' when membership flips false -> true at this arclength.
    """

    arclength: float
    point: Point
    kind: str  # 'enter' | 'exit'


def _segment_candidates(a: Point, b: Point, region: Region, out: list[float]) -> None:
    """Collect parameters t in (0, 1) where a primitive boundary is met.

    Composite membership can only flip at one of these. Tangential circle
    contact (discriminant within 1e-9 of zero, scaled) yields no candidate.
    """
    if isinstance(region, (Union, Intersection)):
        for r in region.parts:
            _segment_candidates(a, b, r, out)
        return
    if isinstance(region, Complement):
        _segment_candidates(a, b, region.part, out)
        return
    dx, dy = b.x - a.x, b.y - a.y
    if isinstance(region, HalfPlane):
        _axis_hits(a.x if region.axis == "x" else a.y,
                   dx if region.axis == "x" else dy, (region.bound,), out)
        return
    if isinstance(region, AxisRect):
        _axis_hits(a.x, dx, (region.xmin, region.xmax), out)
        _axis_hits(a.y, dy, (region.ymin, region.ymax), out)
        return
    if isinstance(region, Disk):
        cx, cy = a.x - region.center.x, a.y - region.center.y
        qa = dx * dx + dy * dy
        qb = 2.0 * (cx * dx + cy * dy)
        qc = cx * cx + cy * cy - region.radius * region.radius
        disc = qb * qb - 4.0 * qa * qc
        # tangency guard: scaled discriminant within 1e-9 counts as no contact
        if qa <= 0.0 or disc <= 1e-9 * max(qa * region.radius * region.radius, 1.0):
            return
        root = math.sqrt(disc)
        for t in ((-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)):
            if 0.0 < t < 1.0:
                out.append(t)
        return
    raise TypeError(f"not a region: {region!r}")


def _axis_hits(origin: float, delta: float, bounds: tuple[float, ...], out: list[float]) -> None:
    if delta == 0.0:
        return
    for bound in bounds:
        t = (bound - origin) / delta
        if 0.0 < t < 1.0:
            out.append(t)


def path_region_crossings(path: Polyline, region: Region) -> list[Crossing]:
    """All membership flips of ``region`` along ``path``, ordered by arclength.

    Guarantees: kinds alternate starting from the membership of the first
    vertex; crossings closer than EPS_ARC collapse into none (the pair
    cancels); membership of path.point_at(s) changes exactly at the
    returned arclengths.
    """
    crossings: list[Crossing] = []
    inside = point_in_region(path.vertices[0], region)
    marks = path.vertex_arclengths
    for i, (a, b) in enumerate(zip(path.vertices, path.vertices[1:])):
        cands: list[float] = []
        _segment_candidates(a, b, region, cands)
        cands = sorted(set(cands))
        seglen = path.segment_lengths[i]
        prev_t = 0.0
        for t in cands + [1.0]:
            mid = (prev_t + t) / 2.0
            p = Point(a.x + mid * (b.x - a.x), a.y + mid * (b.y - a.y))
            now = point_in_region(p, region)
            if now != inside:
                # the flip happened at prev_t's candidate (start of this gap)
                s = marks[i] + prev_t * seglen
                crossings.append(Crossing(s, path.point_at(s), "enter" if now else "exit"))
                inside = now
            prev_t = t
    return _collapse_close(crossings)


def _collapse_close(crossings: list[Crossing]) -> list[Crossing]:
    """Remove enter/exit pairs separated by less than EPS_ARC of arclength."""
    out: list[Crossing] = []
    for c in crossings:
        if out and c.arclength - out[-1].arclength < EPS_ARC and c.kind != out[-1].kind:
            out.pop()
        else:
            out.append(c)
    return out


# --- JSON codec ---------------------------------------------------------------

def region_to_json(region: Region) -> dict:
    """Plain-dict form of a region, stable under round trips."""
    if isinstance(region, AxisRect):
        return {"kind": "rect", "xmin": region.xmin, "xmax": region.xmax,
                "ymin": region.ymin, "ymax": region.ymax}
    if isinstance(region, Disk):
        return {"kind": "disk", "x": region.center.x, "y": region.center.y,
                "radius": region.radius}
    if isinstance(region, HalfPlane):
        return {"kind": "halfplane", "axis": region.axis, "bound": region.bound,
                "side": region.side}
    if isinstance(region, Union):
        return {"kind": "union", "parts": [region_to_json(r) for r in region.parts]}
    if isinstance(region, Intersection):
        return {"kind": "intersection",
                "parts": [region_to_json(r) for r in region.parts]}
    if isinstance(region, Complement):
        return {"kind": "complement", "part": region_to_json(region.part)}
    raise TypeError(f"not a region: {region!r}")


def region_from_json(data: dict) -> Region:
    kind = data.get("kind")
    if kind == "rect":
        return AxisRect(float(data["xmin"]), float(data["xmax"]),
                        float(data["ymin"]), float(data["ymax"]))
    if kind == "disk":
        return Disk(Point(float(data["x"]), float(data["y"])), float(data["radius"]))
    if kind == "halfplane":
        return HalfPlane(data["axis"], float(data["bound"]), data["side"])
    if kind == "union":
        return Union(tuple(region_from_json(r) for r in data["parts"]))
    if kind == "intersection":
        return Intersection(tuple(region_from_json(r) for r in data["parts"]))
    if kind == "complement":
        return Complement(region_from_json(data["part"]))
    raise ValueError(f"unknown region kind {kind!r}")


def subpath(path: Polyline, s0: float, s1: float | None = None) -> Polyline:
    """The sub-polyline from arclength s0 to s1 (default: the end)."""
    total = path.length
    s0 = min(max(s0, 0.0), total)
    s1 = total if s1 is None else min(max(s1, s0), total)
    marks = path.vertex_arclengths
    pts = [path.point_at(s0)]
    for i, s in enumerate(marks):
        if s0 + EPS_ARC < s < s1 - EPS_ARC:
            pts.append(path.vertices[i])
    end = path.point_at(s1)
    if distance(end, pts[-1]) > EPS_ARC:
        pts.append(end)
    if len(pts) == 1:
        pts.append(pts[0])
    return Polyline(tuple(pts))
