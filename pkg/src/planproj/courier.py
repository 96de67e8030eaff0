"""Office-courier fixture: world map, delivery tours, revision rules, and
the two-letters debugging scenario.

The module has three layers.  ``build_fixture_world`` constructs the office
floor (a hallway with six rooms on each side, doorway disks, five named
hallway waypoints, and desks holding letters).  ``heuristic_schedule`` turns
delivery requests into a ``TourPlan``: named at-location subplans ordered by
a nearest-neighbor sweep, with pickups constrained to precede their
put-downs and unreachable pickups floated as opportunities.
``apply_revision_rule`` edits the partial order (or drops an opportunity)
and the tour rematerializes into a runnable plan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import DomainError
from .geom2d import AxisRect, Disk, HalfPlane, Intersection, Point, distance
from .crp import nodes
from .crp.printer import print_plan
from .fluents import And, Cmp, Dist, Eq, Input, Or
from .rules import RuleSet, load_rules
from .timeline import Timeline
from .worldmodel import (BeliefEntry, BeliefState, Door, Waypoint, World,
                         WorldObject)

TOUR_COMPLETE_FLUENT = "tour-complete"
WHEELS_VALVE = "wheels"


class CycleIntroduced(Exception):
    """A revision would make the subplan ordering cyclic."""


@dataclass(frozen=True)
class DeliveryRequest:
    """One delivery: carry ``object_id`` from ``pickup`` to ``dropoff``.

    ``envelope_color`` is either a known color string or a tuple of
    ``(color, weight)`` pairs when the color is uncertain.  ``deadline``
    is carried as data; nothing in the projector enforces it.
    """

    object_id: str
    pickup: str
    dropoff: str
    deadline: float | None = None
    envelope_color: object = None

    def __post_init__(self):
        if self.pickup == self.dropoff:
            raise DomainError(
                f"request {self.object_id!r}: pickup and dropoff coincide")


@dataclass(frozen=True)
class Subplan:
    """One at-location stop of a tour."""

    name: str
    kind: str  # 'pickup' | 'putdown'
    object_id: str
    room: str
    target: str          # location name the robot navigates to
    point: Point         # its coordinates, used by the scheduling sweep
    opportunistic: bool = False
    open_fluent: str | None = None  # door fluent gating an opportunity


@dataclass(frozen=True)
class OrderingEdge:
    """``before`` must precede ``after``.

    Weak edges come from the pickup-before-putdown law and are honored at
    run time by execution-state guards; strong edges come from revisions
    and are honored by the schedule itself.
    """

    before: str
    after: str
    strong: bool = False


@dataclass(frozen=True)
class AddOrdering:
    before: str
    after: str


@dataclass(frozen=True)
class DropOpportunity:
    name: str


@dataclass(frozen=True)
class TourPlan:
    """A scheduled delivery tour: subplans plus a partial order.

    ``sequence`` holds the scheduled order of the integrated subplans;
    opportunistic subplans not forced into the sequence float beside it
    and trigger on their door fluent.
    """

    requests: tuple[DeliveryRequest, ...]
    subplans: tuple[Subplan, ...]
    edges: tuple[OrderingEdge, ...]
    start: Point
    sequence: tuple[str, ...] = ()
    floating: tuple[str, ...] = ()

    def subplan(self, name: str) -> Subplan:
        for sp in self.subplans:
            if sp.name == name:
                return sp
        raise DomainError(f"unknown subplan {name!r}")

    def has_subplan(self, name: str) -> bool:
        return any(sp.name == name for sp in self.subplans)

    # -- materialization ---------------------------------------------------------

    def materialize(self) -> nodes.Plan:
        """The runnable plan: a sequence of guarded at-location subplans,
        with floating opportunities in parallel (they wake on their door
        fluent, or on tour completion so the plan can finish)."""
        by_name = {sp.name: sp for sp in self.subplans}
        main_items: list[nodes.Plan] = [
            _subplan_node(by_name[name]) for name in self.sequence]
        if not self.floating:
            return nodes.seq_of(main_items)
        main_items.append(nodes.SetVar(TOUR_COMPLETE_FLUENT, 1))
        branches: list[nodes.Plan] = [
            _floating_node(by_name[name]) for name in self.floating]
        branches.append(nodes.Seq(tuple(main_items)))
        return nodes.Par(tuple(branches))

    def to_plan_text(self) -> str:
        return print_plan(self.materialize())


def _exec_fluent(object_id: str) -> str:
    return f"execution-state/{object_id}"


def _at_location(sp: Subplan) -> nodes.Plan:
    """The at-location schema: claim the wheels, navigate, check the room's
    door on arrival, act, advance the delivery's execution state."""
    act = nodes.PickUp(sp.object_id) if sp.kind == "pickup" \
        else nodes.PutDown(sp.object_id)
    after = "loaded" if sp.kind == "pickup" else "delivered"
    body = (nodes.Primitive(nodes.GoTo(sp.target)),
            nodes.Primitive(nodes.EstimateDoorAngle()),
            nodes.Primitive(act),
            nodes.SetVar(_exec_fluent(sp.object_id), after))
    return nodes.WithValve(WHEELS_VALVE, nodes.Seq(body))


def _guard(sp: Subplan):
    state = "to-be-acquired" if sp.kind == "pickup" else "loaded"
    gate = Eq(_exec_fluent(sp.object_id), state)
    if sp.opportunistic and sp.open_fluent is not None:
        return And((Input(sp.open_fluent), gate))
    return gate


def _subplan_node(sp: Subplan) -> nodes.Plan:
    return nodes.Named(sp.name, nodes.If(_guard(sp), _at_location(sp)))


def _floating_node(sp: Subplan) -> nodes.Plan:
    """Fig-7 style opportunity: sleep until the door fluent rises (or the
    tour ends), then act only if the door really is open."""
    wake = Or((Input(sp.open_fluent), Input(TOUR_COMPLETE_FLUENT)))
    return nodes.Named(sp.name, nodes.Seq((
        nodes.WaitFor(wake),
        nodes.If(_guard(sp), _at_location(sp)),
    )))


# --- scheduling ----------------------------------------------------------------

def _door_of_room(world: World, room: str) -> Door | None:
    for name in sorted(world.doors):
        if room in world.doors[name].connects:
            return world.doors[name]
    return None


def _target_for(world: World, room: str, object_id: str) -> tuple[str, Point]:
    """Where an at-location stop actually navigates to: the object if the
    world places it, else the room's desk."""
    if object_id in world.objects:
        ob = world.objects[object_id]
        name = f"desk-{room}" if f"desk-{room}" in world.locations else None
        if name and distance(world.locations[name], ob.location) < 1e-9:
            return name, ob.location
    name = f"desk-{room}"
    if name in world.locations:
        return name, world.locations[name]
    raise DomainError(f"room {room!r} has no desk location in the world")


def heuristic_schedule(requests, robot_location: Point, world: World) -> TourPlan:
    """Schedule delivery requests into a tour.

    Pickups whose room is believed shut (the connecting door carries no
    open probability at all) float as opportunities; everything else is
    ordered by a nearest-neighbor sweep from the robot's location, never
    placing a put-down before its own pickup.
    """
    requests = tuple(requests)
    if not requests:
        raise DomainError("cannot schedule an empty request list")
    seen = set()
    for req in requests:
        if req.object_id in seen:
            raise DomainError(f"duplicate delivery object {req.object_id!r}")
        seen.add(req.object_id)

    subplans: list[Subplan] = []
    edges: list[OrderingEdge] = []
    names_used: set[str] = set()

    def unique(base: str, object_id: str) -> str:
        if base not in names_used:
            names_used.add(base)
            return base
        alt = f"{base}-{object_id}"
        if alt in names_used:
            raise DomainError(f"subplan name collision for {alt!r}")
        names_used.add(alt)
        return alt

    for req in requests:
        door = _door_of_room(world, req.pickup)
        shut = door is not None and door.open_probability <= 0.0
        p_name = unique(f"enter-{req.pickup}", req.object_id)
        p_target, p_point = _target_for(world, req.pickup, req.object_id)
        subplans.append(Subplan(
            name=p_name, kind="pickup", object_id=req.object_id,
            room=req.pickup, target=p_target, point=p_point,
            opportunistic=shut,
            open_fluent=door.fluent if (shut and door is not None) else None))
        d_name = unique(f"deliver-{req.dropoff}", req.object_id)
        d_target, d_point = _target_for(world, req.dropoff, req.object_id)
        subplans.append(Subplan(
            name=d_name, kind="putdown", object_id=req.object_id,
            room=req.dropoff, target=d_target, point=d_point))
        edges.append(OrderingEdge(p_name, d_name, strong=False))

    tour = TourPlan(requests=requests, subplans=tuple(subplans),
                    edges=tuple(edges), start=robot_location)
    return _reschedule(tour)


def _check_acyclic(names, edges) -> None:
    succ: dict[str, list[str]] = {n: [] for n in names}
    for e in edges:
        succ[e.before].append(e.after)
    state: dict[str, int] = {}

    def visit(n: str) -> None:
        state[n] = 1
        for m in succ[n]:
            mark = state.get(m, 0)
            if mark == 1:
                raise CycleIntroduced(f"ordering cycle through {m!r}")
            if mark == 0:
                visit(m)
        state[n] = 2

    for n in names:
        if state.get(n, 0) == 0:
            visit(n)


def _forced_names(subplans, edges) -> set[str]:
    """Opportunistic subplans that a strong constraint forces into the
    schedule: those reaching an integrated subplan along a path that uses
    at least one strong edge."""
    opportunistic = {sp.name for sp in subplans if sp.opportunistic}
    integrated = {sp.name for sp in subplans if not sp.opportunistic}
    succ: dict[str, list[OrderingEdge]] = {}
    for e in edges:
        succ.setdefault(e.before, []).append(e)

    forced: set[str] = set()
    for origin in opportunistic:
        # states: (node, seen-strong-edge)
        stack = [(origin, False)]
        seen = set()
        while stack:
            node, strong = stack.pop()
            if (node, strong) in seen:
                continue
            seen.add((node, strong))
            if strong and node in integrated:
                forced.add(origin)
                break
            for e in succ.get(node, ()):
                stack.append((e.after, strong or e.strong))
    return forced


def _reschedule(tour: TourPlan) -> TourPlan:
    """Recompute the nearest-neighbor sequence and the floating set.

    The sweep runs over every subplan, opportunities included, as if all
    rooms were reachable; opportunities that stay floating are then lifted
    out, leaving the rest of the schedule in its swept order.  That way an
    opportunity firing at run time replays exactly the swept tour.
    """
    names = [sp.name for sp in tour.subplans]
    _check_acyclic(names, tour.edges)
    forced = _forced_names(tour.subplans, tour.edges)
    by_name = {sp.name: sp for sp in tour.subplans}
    floating = tuple(sp.name for sp in tour.subplans
                     if sp.opportunistic and sp.name not in forced)

    preds: dict[str, set[str]] = {n: set() for n in names}
    for e in tour.edges:
        preds[e.after].add(e.before)

    swept: list[str] = []
    placed: set[str] = set()
    cursor = tour.start
    remaining = set(names)
    while remaining:
        ready = [n for n in remaining if preds[n] <= placed]
        if not ready:
            raise CycleIntroduced("ordering constraints admit no schedule")
        best = min(ready, key=lambda n: (distance(cursor, by_name[n].point), n))
        swept.append(best)
        placed.add(best)
        remaining.discard(best)
        cursor = by_name[best].point
    sequence = tuple(n for n in swept if n not in floating)
    return replace(tour, sequence=sequence, floating=floating)


def apply_revision_rule(tour: TourPlan, rule) -> TourPlan:
    """Apply one revision: an extra ordering constraint, or dropping an
    opportunity.  The partial order must stay acyclic."""
    if isinstance(rule, AddOrdering):
        if not tour.has_subplan(rule.before):
            raise DomainError(f"unknown subplan {rule.before!r}")
        if not tour.has_subplan(rule.after):
            raise DomainError(f"unknown subplan {rule.after!r}")
        if rule.before == rule.after:
            raise CycleIntroduced(f"{rule.before!r} cannot precede itself")
        edges = tour.edges + (OrderingEdge(rule.before, rule.after, strong=True),)
        return _reschedule(replace(tour, edges=edges))
    if isinstance(rule, DropOpportunity):
        sp = tour.subplan(rule.name)
        if not sp.opportunistic:
            raise DomainError(f"subplan {rule.name!r} is not an opportunity")
        dropped = {sp.name}
        # a put-down whose pickup is gone can never run; drop it too
        for other in tour.subplans:
            if other.object_id == sp.object_id and other.kind == "putdown":
                dropped.add(other.name)
        subplans = tuple(s for s in tour.subplans if s.name not in dropped)
        if not subplans:
            raise DomainError("dropping the opportunity empties the tour")
        edges = tuple(e for e in tour.edges
                      if e.before not in dropped and e.after not in dropped)
        requests = tuple(r for r in tour.requests if r.object_id != sp.object_id)
        return _reschedule(replace(tour, requests=requests,
                                   subplans=subplans, edges=edges))
    raise DomainError(f"unknown revision rule {rule!r}")


# --- the fixture world -----------------------------------------------------------

HALL_Y_LOW = 817.0
HALL_Y_HIGH = 1017.0
ROOM_DEPTH = 400.0
DOOR_RADIUS = 40.0
_X_MAX = 2580.0

# room name -> (xmin, xmax, side); coordinates are centimeters.
# A-120's slab matches the published in-room test (860 <= x <= 1265, y < 817).
_TOP_ROOMS = (("a-111", 0.0, 430.0), ("a-113", 430.0, 860.0),
              ("a-110", 860.0, 1290.0), ("a-112", 1290.0, 1720.0),
              ("a-114", 1720.0, 2150.0), ("a-115", 2150.0, 2580.0))
_BOTTOM_ROOMS = (("a-116", 0.0, 430.0), ("a-118", 430.0, 860.0),
                 ("a-120", 860.0, 1265.0), ("a-117", 1265.0, 1700.0),
                 ("a-119", 1700.0, 2150.0), ("a-121", 2150.0, 2580.0))

_WAYPOINT_XS = (215.0, 645.0, 1062.5, 1482.5, 1935.0)
_SPINE_Y = 917.0

START_LOCATION = "start"


def _nearest_wp_name(x: float) -> str:
    best = min(range(len(_WAYPOINT_XS)), key=lambda i: (abs(_WAYPOINT_XS[i] - x), i))
    return f"wp-{best + 1}"


def build_fixture_world() -> World:
    """The deterministic office floor used by every courier scenario."""
    rooms: dict[str, AxisRect] = {}
    doors: dict[str, Door] = {}
    waypoints: dict[str, Waypoint] = {}
    edges: list[tuple[str, str]] = []
    locations: dict[str, Point] = {}

    for i, x in enumerate(_WAYPOINT_XS, start=1):
        waypoints[f"wp-{i}"] = Waypoint(f"wp-{i}", Point(x, _SPINE_Y))
    for i in range(len(_WAYPOINT_XS) - 1):
        edges.append((f"wp-{i + 1}", f"wp-{i + 2}"))

    def add_room(name: str, xmin: float, xmax: float, top: bool) -> None:
        cx = (xmin + xmax) / 2.0
        if top:
            rooms[name] = AxisRect(xmin, xmax, HALL_Y_HIGH, HALL_Y_HIGH + ROOM_DEPTH)
            door_y, desk_y = HALL_Y_HIGH, HALL_Y_HIGH + ROOM_DEPTH / 2.0
        else:
            rooms[name] = AxisRect(xmin, xmax, HALL_Y_LOW - ROOM_DEPTH, HALL_Y_LOW)
            door_y, desk_y = HALL_Y_LOW, HALL_Y_LOW - ROOM_DEPTH / 2.0
        open_p = 0.0 if name == "a-113" else 1.0
        doors[name] = Door(name, Point(cx, door_y), DOOR_RADIUS,
                           (name, "hallway"), open_probability=open_p)
        waypoints[f"door-{name}"] = Waypoint(f"door-{name}", Point(cx, door_y))
        waypoints[f"desk-{name}"] = Waypoint(f"desk-{name}", Point(cx, desk_y))
        locations[f"desk-{name}"] = Point(cx, desk_y)
        edges.append((_nearest_wp_name(cx), f"door-{name}"))
        edges.append((f"door-{name}", f"desk-{name}"))

    for name, xmin, xmax in _TOP_ROOMS:
        add_room(name, xmin, xmax, top=True)
    for name, xmin, xmax in _BOTTOM_ROOMS:
        add_room(name, xmin, xmax, top=False)

    locations[START_LOCATION] = Point(1482.5, 880.0)

    hallway = AxisRect(0.0, _X_MAX, HALL_Y_LOW, HALL_Y_HIGH)
    in_a120 = Intersection((rooms["a-120"], HalfPlane("y", HALL_Y_LOW, "below")))

    objects = {
        "let-1": WorldObject("let-1", locations["desk-a-111"], kind="letter",
                             color="yellow"),
        "let-2": WorldObject("let-2", locations["desk-a-113"], kind="letter",
                             color_distribution=(("blue", 0.5), ("yellow", 0.5))),
    }

    world = World(
        speeds={"office": 30.0, "hallway": 80.0},
        rooms=rooms, doors=doors, waypoints=waypoints, edges=edges,
        locations=locations,
        triggers={"in-a-120": in_a120},
        mode_regions=[("hallway", hallway)],
        default_mode="office",
        objects=objects,
    )
    world.validate()
    return world


def courier_requests() -> tuple[DeliveryRequest, DeliveryRequest]:
    """The two deliveries of the debugging scenario: a known yellow letter
    from A-111 to A-117 and a letter of unknown color from A-113 to A-120."""
    return (
        DeliveryRequest("let-1", "a-111", "a-117", envelope_color="yellow"),
        DeliveryRequest("let-2", "a-113", "a-120",
                        envelope_color=(("blue", 0.5), ("yellow", 0.5))),
    )


def courier_beliefs(door_open_p: float = 0.5) -> BeliefState:
    """Projection-time override: fresh evidence that A-113 may be open."""
    if not (0.0 <= door_open_p <= 1.0):
        raise DomainError(f"door probability {door_open_p} out of [0, 1]")
    return BeliefState([BeliefEntry(("open", "a-113"), "bernoulli", p=door_open_p)])


COURIER_RULES_TEXT = """\
(rules
  (e->p pickup-loads
    :event (end (pick-up ?o))
    :causes ((assert (carrying ?o))))
  (e->p putdown-unloads
    :event (end (put-down ?o))
    :causes ((clip (carrying ?o)) (assert (delivered ?o))))
  (e->p two-same-color
    :event (begin (pick-up ?o))
    :if ((color ?o ?c) (carrying ?other) (color ?other ?c))
    :causes ((assert (failure two-same-color))))
  (flaw same-color-mixup
    :exists-occasion (failure two-same-color)))
"""


def courier_rules() -> RuleSet:
    return load_rules(COURIER_RULES_TEXT)


def initial_tour(world: World | None = None) -> TourPlan:
    world = world or build_fixture_world()
    return heuristic_schedule(courier_requests(),
                              world.locations[START_LOCATION], world)


def revised_tour(world: World | None = None) -> TourPlan:
    """The debugger's fix: deliver the unknown-color letter before picking
    up the known yellow one, so both are never carried together."""
    return apply_revision_rule(initial_tour(world),
                               AddOrdering("deliver-a-120", "enter-a-111"))


# --- scenario classification ------------------------------------------------------

CATEGORY_DOOR_CLOSED = "door-closed"
CATEGORY_FAILURE = "opportunity-taken-failure"
CATEGORY_SUCCESS = "opportunity-taken-success"
CATEGORY_RESIDUE = "unclassified"

_FAILURE_PROP = ("failure", "two-same-color")


def classify_scenario(tl: Timeline, opportunity_object: str = "let-2",
                      door: str = "a-113") -> str:
    """Which of the three projected-scenario categories a timeline is in."""
    if _FAILURE_PROP in tl.occasions:
        return CATEGORY_FAILURE
    picked = any(o.event == ("end", ("pick-up", opportunity_object))
                 for o in tl.occurrences)
    if picked:
        return CATEGORY_SUCCESS
    opened = ("open", door) in tl.occasions
    if not opened:
        return CATEGORY_DOOR_CLOSED
    return CATEGORY_RESIDUE


def classify_scenarios(timelines, opportunity_object: str = "let-2",
                       door: str = "a-113") -> dict[str, int]:
    """JSON-ready counts over the three categories (plus any residue)."""
    counts = {CATEGORY_DOOR_CLOSED: 0, CATEGORY_FAILURE: 0,
              CATEGORY_SUCCESS: 0, CATEGORY_RESIDUE: 0}
    for tl in timelines:
        counts[classify_scenario(tl, opportunity_object, door)] += 1
    return counts


# --- the long monitored tour ------------------------------------------------------

_STATION_MARGIN = 100.0
_STATION_MIN_SEP = 120.0


def _monitor_stations(sequence, by_name, start: Point, spacing: float,
                      world: World):
    """Points dotted along the tour's planned route, in visiting order.

    Stations sit on the route polylines themselves at roughly ``spacing``
    arclength intervals, pushed clear of leg endpoints so a station is
    always met in mid-travel, never at a stop."""
    legs = []
    cursor = start
    for name in sequence:
        target = by_name[name].point
        if distance(cursor, target) > 1e-9:
            legs.append(world.route(cursor, target))
        cursor = target
    stations: list[Point] = []
    offset = 0.0
    next_at = spacing
    last_g = -math.inf
    for path in legs:
        length = path.vertex_arclengths[-1]
        if length > 2.0 * _STATION_MARGIN:
            while next_at <= offset + length:
                s = min(max(next_at - offset, _STATION_MARGIN),
                        length - _STATION_MARGIN)
                if offset + s - last_g >= _STATION_MIN_SEP:
                    stations.append(path.point_at(s))
                    last_g = offset + s
                next_at += spacing
        else:
            while next_at <= offset + length:
                next_at += spacing
        offset += length
    return stations


def grand_tour_requests() -> tuple[DeliveryRequest, ...]:
    """Deliveries touching every reachable wing of the floor, with distinct
    envelope colors so no mix-up is possible."""
    colors = ("red", "green", "blue", "white", "grey", "orange")
    hops = (("a-110", "a-116"), ("a-112", "a-118"), ("a-114", "a-121"),
            ("a-115", "a-119"), ("a-116", "a-112"), ("a-118", "a-114"))
    return tuple(
        DeliveryRequest(f"parcel-{i + 1}", src, dst, envelope_color=colors[i])
        for i, (src, dst) in enumerate(hops))


def grand_tour_plan(world: World | None = None,
                    station_spacing: float = 430.0) -> nodes.Plan:
    """A monitored twelve-stop tour.

    A monitor thread walks a chain of proximity wait-fors, one per hallway
    station along the planned route; each fires mid-navigation, and the
    following registration reschedules the running leg.
    """
    world = world or build_fixture_world()
    tour = heuristic_schedule(grand_tour_requests(),
                              world.locations[START_LOCATION], world)
    by_name = {sp.name: sp for sp in tour.subplans}
    stations = _monitor_stations(tour.sequence, by_name,
                                 world.locations[START_LOCATION],
                                 station_spacing, world)
    steps: list[nodes.Plan] = []
    for p in stations:
        steps.append(nodes.WaitFor(Cmp("lt", Dist("robot-x", "robot-y", p),
                                       60.0)))
        steps.append(nodes.Primitive(nodes.EstimateDoorAngle()))
    main = tour.materialize()
    if not steps:
        return main
    monitor = nodes.seq_of(steps)
    return nodes.Par((main, monitor))
