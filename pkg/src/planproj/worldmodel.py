"""Static world description: rooms, doors, mode bands, waypoints, objects.

A world file is JSON.  Distances are centimeters, times seconds, speeds
centimeters per second.  Travel-mode bands ("mode regions") are ordered:
the prevailing mode at a point is the first band containing it, falling
back to the default mode.  The belief description pairs with the world:
a distribution over the initial state (door open/closed, object colors),
sampled once per projection at the start event.

Route planning runs over the waypoint graph with shortest paths; ties
break by waypoint name so routes are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from heapq import heappop, heappush

from . import terms
from .automaton import VariantSplit
from .geom2d import (
    AxisRect,
    Disk,
    Point,
    Polyline,
    Region,
    distance,
    point_in_region,
    region_from_json,
    region_to_json,
)
from .sexpr import parse_one, strip
from .terms import Term, term_from_sexpr


class WorldError(Exception):
    """The world or belief description is malformed."""


@dataclass(frozen=True)
class Door:
    name: str
    center: Point
    radius: float
    connects: tuple[str, str]
    open_probability: float = 1.0
    open_angle: float = 90.0
    closed_angle: float = 0.0

    @property
    def passing_region(self) -> Disk:
        return Disk(self.center, self.radius)

    @property
    def prop(self) -> Term:
        return ("open", self.name)

    @property
    def fluent(self) -> str:
        return f"open-{self.name}"


@dataclass(frozen=True)
class WorldObject:
    name: str
    location: Point
    kind: str = "object"
    color: str | None = None  # fixed color; None when drawn from beliefs
    color_distribution: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class Waypoint:
    name: str
    point: Point


@dataclass
class World:
    speeds: dict[str, float]
    rooms: dict[str, AxisRect]
    doors: dict[str, Door]
    waypoints: dict[str, Waypoint]
    edges: list[tuple[str, str]]
    locations: dict[str, Point]
    triggers: dict[str, Region]
    mode_regions: list[tuple[str, Region]] = field(default_factory=list)
    default_mode: str = "office"
    mode_variants: dict[str, VariantSplit] = field(default_factory=dict)
    objects: dict[str, WorldObject] = field(default_factory=dict)
    obstacles: dict[str, Region] = field(default_factory=dict)
    arrival_tolerance: float = 1.0
    _adj: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.validate()
        self._adj = {}
        for a, b in self.edges:
            d = distance(self.waypoints[a].point, self.waypoints[b].point)
            self._adj.setdefault(a, []).append((b, d))
            self._adj.setdefault(b, []).append((a, d))
        for lst in self._adj.values():
            lst.sort()

    # -- queries ---------------------------------------------------------------

    def speed_for(self, travel_mode: str) -> float:
        try:
            return self.speeds[travel_mode]
        except KeyError:
            raise WorldError(f"no speed configured for travel mode {travel_mode!r}")

    def prevailing_mode(self, p: Point) -> str:
        for mode, region in self.mode_regions:
            if point_in_region(p, region):
                return mode
        return self.default_mode

    def arrival_region(self, dst: Point) -> Disk:
        return Disk(dst, self.arrival_tolerance)

    def location_point(self, name: str) -> Point:
        if name in self.locations:
            return self.locations[name]
        if name in self.objects:
            return self.objects[name].location
        if name in self.waypoints:
            return self.waypoints[name].point
        if name in self.doors:
            return self.doors[name].center
        raise WorldError(f"unknown location {name!r}")

    def room_of(self, p: Point) -> str | None:
        for name in sorted(self.rooms):
            if point_in_region(p, self.rooms[name]):
                return name
        return None

    def objects_near(self, p: Point, radius: float) -> list[WorldObject]:
        out = [ob for ob in self.objects.values()
               if distance(ob.location, p) <= radius]
        out.sort(key=lambda ob: (distance(ob.location, p), ob.name))
        return out

    def nearest_waypoint(self, p: Point) -> str:
        if not self.waypoints:
            raise WorldError("world has no waypoints")
        return min(self.waypoints.values(),
                   key=lambda w: (distance(w.point, p), w.name)).name

    def shortest_waypoint_path(self, start: str, goal: str) -> list[str]:
        """Shortest path over the waypoint graph; ties break by name."""
        if start not in self.waypoints or goal not in self.waypoints:
            raise WorldError(f"unknown waypoint in route {start!r} -> {goal!r}")
        if start == goal:
            return [start]
        dist_to = {start: 0.0}
        prev: dict[str, str] = {}
        heap = [(0.0, start)]
        seen = set()
        while heap:
            d, u = heappop(heap)
            if u in seen:
                continue
            seen.add(u)
            if u == goal:
                break
            for v, w in self._adj.get(u, []):
                nd = d + w
                if nd < dist_to.get(v, float("inf")) - 1e-12:
                    dist_to[v] = nd
                    prev[v] = u
                    heappush(heap, (nd, v))
        if goal not in seen:
            raise WorldError(f"no route between waypoints {start!r} and {goal!r}")
        path = [goal]
        while path[-1] != start:
            path.append(prev[path[-1]])
        path.reverse()
        return path

    def route(self, src: Point, dst: Point) -> Polyline:
        """Polyline src -> entry waypoint -> ... -> exit waypoint -> dst."""
        a = self.nearest_waypoint(src)
        b = self.nearest_waypoint(dst)
        names = self.shortest_waypoint_path(a, b)
        pts = [src] + [self.waypoints[n].point for n in names] + [dst]
        dedup = [pts[0]]
        for p in pts[1:]:
            if distance(p, dedup[-1]) > 1e-9:
                dedup.append(p)
        if len(dedup) == 1:
            raise WorldError(f"zero-length route from {src} to {dst}")
        return Polyline(tuple(dedup))

    # -- validation --------------------------------------------------------------

    def validate(self) -> None:
        for mode, speed in self.speeds.items():
            if not (speed > 0.0):
                raise WorldError(f"speed for {mode!r} must be positive, got {speed}")
        if not (self.arrival_tolerance > 0.0):
            raise WorldError("arrival tolerance must be positive")
        for mode, _region in self.mode_regions:
            if mode not in self.speeds:
                raise WorldError(f"mode band {mode!r} has no configured speed")
        if self.default_mode not in self.speeds:
            raise WorldError(f"default mode {self.default_mode!r} has no speed")
        for door in self.doors.values():
            if not (0.0 <= door.open_probability <= 1.0):
                raise WorldError(f"door {door.name!r}: open probability "
                                 f"{door.open_probability} out of [0, 1]")
            for side in door.connects:
                if side not in self.rooms and side != "hallway":
                    raise WorldError(
                        f"door {door.name!r} connects unknown room {side!r}")
        names = set(self.waypoints)
        for a, b in self.edges:
            if a not in names or b not in names:
                raise WorldError(f"edge ({a!r}, {b!r}) references unknown waypoint")
            if a == b:
                raise WorldError(f"edge ({a!r}, {b!r}) is a self-loop")
        for name, ob in self.objects.items():
            if ob.color is None and not ob.color_distribution:
                raise WorldError(f"object {name!r} has neither a color nor "
                                 f"a color distribution")


# --- JSON ----------------------------------------------------------------------

def _point(v) -> Point:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise WorldError(f"expected [x, y], got {v!r}")
    return Point(float(v[0]), float(v[1]))


def world_from_json(data: dict) -> World:
    try:
        rooms = {name: AxisRect(float(r["xmin"]), float(r["xmax"]),
                                float(r["ymin"]), float(r["ymax"]))
                 for name, r in data.get("rooms", {}).items()}
        doors = {}
        for name, d in data.get("doors", {}).items():
            doors[name] = Door(name, _point(d["center"]), float(d["radius"]),
                               (d["connects"][0], d["connects"][1]),
                               float(d.get("open_probability", 1.0)),
                               float(d.get("open_angle", 90.0)),
                               float(d.get("closed_angle", 0.0)))
        waypoints = {name: Waypoint(name, _point(w))
                     for name, w in data.get("waypoints", {}).items()}
        edges = [(a, b) for a, b in data.get("edges", [])]
        locations = {name: _point(v) for name, v in data.get("locations", {}).items()}
        triggers = {name: region_from_json(r)
                    for name, r in data.get("triggers", {}).items()}
        mode_regions = [(m, region_from_json(r))
                        for m, r in data.get("mode_regions", [])]
        mode_variants = {
            mode: VariantSplit(tuple((float(f), int(s)) for f, s in v["factors"]),
                               int(v["denom_power"]))
            for mode, v in data.get("mode_variants", {}).items()
        }
        objects = {}
        for name, ob in data.get("objects", {}).items():
            loc = ob["location"]
            point = _point(loc) if isinstance(loc, (list, tuple)) else None
            if point is None:
                if loc in locations:
                    point = locations[loc]
                elif loc in data.get("waypoints", {}):
                    point = _point(data["waypoints"][loc])
                else:
                    raise WorldError(f"object {name!r}: unknown location {loc!r}")
            dist_pairs = tuple((c, float(w))
                               for c, w in ob.get("color_distribution", {}).items())
            objects[name] = WorldObject(name, point, ob.get("kind", "object"),
                                        ob.get("color"),
                                        tuple(sorted(dist_pairs)))
        obstacles = {name: region_from_json(r)
                     for name, r in data.get("obstacles", {}).items()}
        return World(
            speeds={k: float(v) for k, v in data.get("speeds", {}).items()},
            rooms=rooms, doors=doors, waypoints=waypoints, edges=edges,
            locations=locations, triggers=triggers,
            mode_regions=mode_regions,
            default_mode=data.get("default_mode", "office"),
            mode_variants=mode_variants,
            objects=objects, obstacles=obstacles,
            arrival_tolerance=float(data.get("arrival_tolerance", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise WorldError(f"malformed world description: {err}") from None


def world_to_json(world: World) -> dict:
    return {
        "speeds": {k: world.speeds[k] for k in sorted(world.speeds)},
        "default_mode": world.default_mode,
        "arrival_tolerance": world.arrival_tolerance,
        "rooms": {name: {"xmin": r.xmin, "xmax": r.xmax,
                         "ymin": r.ymin, "ymax": r.ymax}
                  for name, r in sorted(world.rooms.items())},
        "doors": {name: {"center": [d.center.x, d.center.y], "radius": d.radius,
                         "connects": list(d.connects),
                         "open_probability": d.open_probability,
                         "open_angle": d.open_angle,
                         "closed_angle": d.closed_angle}
                  for name, d in sorted(world.doors.items())},
        "waypoints": {name: [w.point.x, w.point.y]
                      for name, w in sorted(world.waypoints.items())},
        "edges": sorted([list(e) for e in world.edges]),
        "locations": {name: [p.x, p.y]
                      for name, p in sorted(world.locations.items())},
        "triggers": {name: region_to_json(r)
                     for name, r in sorted(world.triggers.items())},
        "mode_regions": [[m, region_to_json(r)] for m, r in world.mode_regions],
        "mode_variants": {
            mode: {"factors": [[f, s] for f, s in v.factors],
                   "denom_power": v.denom_power}
            for mode, v in sorted(world.mode_variants.items())
        },
        "objects": {name: {"location": [ob.location.x, ob.location.y],
                           "kind": ob.kind,
                           **({"color": ob.color} if ob.color else {}),
                           **({"color_distribution": dict(ob.color_distribution)}
                              if ob.color_distribution else {})}
                    for name, ob in sorted(world.objects.items())},
        "obstacles": {name: region_to_json(r)
                      for name, r in sorted(world.obstacles.items())},
    }


def load_world(path: str) -> World:
    with open(path, "r", encoding="utf-8") as fh:
        return world_from_json(json.load(fh))


# --- beliefs ---------------------------------------------------------------------

@dataclass(frozen=True)
class BeliefEntry:
    """One independent marginal over the initial truth of a proposition.

    The template may contain a single '?' placeholder (choice entries
    substitute the drawn value for it).
    """

    template: Term
    kind: str  # 'bernoulli' | 'constant' | 'choice'
    p: float = 0.0
    value: object = None
    values: tuple = ()
    weights: tuple = ()

    def key(self) -> str:
        return terms.render(self.template)


@dataclass
class BeliefState:
    entries: list[BeliefEntry]

    def sample(self, rng) -> list[Term]:
        """Draw each marginal once; returns the ground propositions that
        hold initially (entry order, which is sorted by template)."""
        out = []
        for e in self.entries:
            if e.kind == "constant":
                if e.value is True:
                    out.append(e.template)
                elif e.value not in (False, None):
                    out.append(_fill(e.template, e.value))
            elif e.kind == "bernoulli":
                if rng.random() < e.p:
                    out.append(e.template)
            elif e.kind == "choice":
                r = rng.random() * sum(e.weights)
                acc = 0.0
                chosen = e.values[-1]
                for v, w in zip(e.values, e.weights):
                    acc += w
                    if r < acc:
                        chosen = v
                        break
                out.append(_fill(e.template, chosen))
            else:
                raise WorldError(f"unknown belief kind {e.kind!r}")
        return out


def _fill(template: Term, value) -> Term:
    """Substitute the '?' placeholder; append when there is none."""
    if isinstance(template, tuple):
        if "?" in template:
            return tuple(value if t == "?" else t for t in template)
        return template + (value,)
    return (template, value)


def _sorted_entries(entries: list[BeliefEntry]) -> list[BeliefEntry]:
    return sorted(entries, key=lambda e: e.key())


def beliefs_from_json(data: dict) -> BeliefState:
    """Belief file: proposition s-expression -> distribution spec."""
    entries = []
    for prop_text, spec in data.items():
        template = term_from_sexpr(strip(parse_one(prop_text)))
        if not isinstance(spec, dict):
            entries.append(BeliefEntry(template, "constant", value=spec))
            continue
        kind = spec.get("kind", "constant")
        if kind == "bernoulli":
            p = float(spec["p"])
            if not (0.0 <= p <= 1.0):
                raise WorldError(f"belief {prop_text!r}: p={p} out of [0, 1]")
            entries.append(BeliefEntry(template, "bernoulli", p=p))
        elif kind == "constant":
            entries.append(BeliefEntry(template, "constant",
                                       value=spec.get("value", True)))
        elif kind == "choice":
            values = tuple(spec["values"])
            weights = tuple(float(w) for w in spec.get("weights",
                                                       [1.0] * len(values)))
            if len(weights) != len(values) or not values:
                raise WorldError(f"belief {prop_text!r}: values/weights mismatch")
            if any(w < 0 for w in weights) or sum(weights) <= 0:
                raise WorldError(f"belief {prop_text!r}: weights must be "
                                 f"nonnegative with positive sum")
            entries.append(BeliefEntry(template, "choice", values=values,
                                       weights=weights))
        else:
            raise WorldError(f"belief {prop_text!r}: unknown kind {kind!r}")
    return BeliefState(_sorted_entries(entries))


def default_beliefs(world: World) -> BeliefState:
    """Beliefs implied by the world file alone: door open states from
    their probabilities, object colors from their distributions."""
    entries = []
    for door in world.doors.values():
        if door.open_probability >= 1.0:
            entries.append(BeliefEntry(door.prop, "constant", value=True))
        elif door.open_probability <= 0.0:
            entries.append(BeliefEntry(door.prop, "constant", value=False))
        else:
            entries.append(BeliefEntry(door.prop, "bernoulli",
                                       p=door.open_probability))
    for ob in world.objects.values():
        template = ("color", ob.name, "?")
        if ob.color is not None:
            entries.append(BeliefEntry(template, "constant", value=ob.color))
        elif ob.color_distribution:
            values = tuple(c for c, _ in ob.color_distribution)
            weights = tuple(w for _, w in ob.color_distribution)
            entries.append(BeliefEntry(template, "choice", values=values,
                                       weights=weights))
    return BeliefState(_sorted_entries(entries))


def beliefs_to_json(beliefs: BeliefState) -> dict:
    """Inverse of beliefs_from_json; entries appear in canonical key order."""
    out = {}
    for e in _sorted_entries(list(beliefs.entries)):
        key = terms.render(e.template)
        if e.kind == "bernoulli":
            out[key] = {"kind": "bernoulli", "p": e.p}
        elif e.kind == "constant":
            out[key] = {"kind": "constant", "value": e.value}
        else:
            out[key] = {"kind": "choice", "values": list(e.values),
                        "weights": list(e.weights)}
    return out


def merge_beliefs(base: BeliefState, override: BeliefState) -> BeliefState:
    """Entries from ``override`` replace base entries with equal templates."""
    merged = {e.key(): e for e in base.entries}
    for e in override.entries:
        merged[e.key()] = e
    return BeliefState(_sorted_entries(list(merged.values())))


def load_beliefs(path: str) -> BeliefState:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise WorldError("belief file must hold a JSON object")
    return beliefs_from_json(data)
