"""Event-driven temporal projection of concurrent reactive plans.

The projection loop repeatedly takes the earliest of: the next endogenous
schedule entry (each active navigation primitive sleeps under a persist
``sleeping(id)`` occasion until its next predicted event), the next
persist expiry, or the earliest exogenous occurrence sampled over the gap
to that date.  Each event is recorded on the timeline, pushed through the
effect rules, mirrored into the interpreter's fluent store, and handed to
the interpreter, whose newly issued primitives and newly blocked
conditions feed back into the schedule (rescheduling in-flight navigation
when a new trigger region appears).

Positions are interpolated linearly along navigation paths, so trigger
crossings are computed geometrically once per (re)schedule instead of by
time-stepping.  Exogenous rules with a spacing at or below the trigger
threshold fire deterministically at condition onset; the clock-tick
reference projector keeps their literal Poisson reading.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from heapq import heappop, heappush

from . import fluents, terms
from .crp import Interpreter, PrimitiveDone, Wakeup, nodes
from .geom2d import (
    Point,
    Polyline,
    Region,
    distance,
    path_region_crossings,
    point_in_region,
    subpath,
)
from .rules import RuleSet, apply_effect_rules, random_number, solve_condition_over
from .terms import Term, fluent_id_for_term
from .timeline import (
    CLASS_COMPUTATIONAL,
    CLASS_PHYSICAL,
    CLASS_SENSOR,
    Occurrence,
    Timeline,
)
from .worldmodel import BeliefState, World, default_beliefs, merge_beliefs


class ZeroSpeedMode(Exception):
    """A path segment falls in a travel mode with no positive speed."""


class ProjectionError(Exception):
    """The projection cannot continue (runaway loop or malformed input)."""


class HorizonExceeded(Exception):
    """The horizon passed before the plan finished.

    The partial timeline (flagged ``horizon_exceeded``) rides on the
    exception as ``.timeline``.
    """

    def __init__(self, message: str, timeline: Timeline):
        super().__init__(message)
        self.timeline = timeline


# --- endogenous event schedules -----------------------------------------------

@dataclass(frozen=True)
class ScheduleEntry:
    """One predicted stop along a path: reached dt seconds after the
    previous entry (at base speeds), at position vals, firing events."""

    dt: float
    vals: Point
    events: tuple[Term, ...]
    arclength: float
    mode: str  # prevailing travel mode on the segment leading here

    def __post_init__(self):
        if self.dt < 0:
            raise ValueError(f"negative dt {self.dt}")
        if not self.events:
            raise ValueError("schedule entry without events")


@dataclass(frozen=True)
class EndogenousEventSchedule:
    entries: tuple[ScheduleEntry, ...]


_EPS = 1e-9


def schedule_endogenous_events(path: Polyline, mode_regions, trigger_regions,
                               speeds: dict, default_mode: str = "office",
                               initial_mode: str | None = None) -> EndogenousEventSchedule:
    """Predict all endogenous events along a path from its geometry.

    Entries are produced at every travel-mode band boundary (emitting
    set-travel-mode for the mode taking over), every trigger-region
    crossing (emitting passive-sensor-update for the region's fluent
    with the new membership), every interior path vertex, and the path
    endpoint; co-located candidates merge into one entry.  dt values use
    the base speed of the prevailing mode over each gap (ZeroSpeedMode
    when that speed is missing or nonpositive).  The start point itself
    yields a zero-dt entry only when the prevailing mode there differs
    from initial_mode.
    """
    total = path.length

    def prevailing(s: float) -> str:
        p = path.point_at(s)
        for mode, region in mode_regions:
            if point_in_region(p, region):
                return mode
        return default_mode

    marks: dict[float, list[Term]] = {}

    def add(s: float, ev: Term | None) -> None:
        s = min(max(s, 0.0), total)
        for existing in marks:
            if abs(existing - s) < _EPS:
                if ev is not None:
                    marks[existing].append(ev)
                return
        marks[s] = [] if ev is None else [ev]

    for k, s in enumerate(path.vertex_arclengths):
        if k == 0 or s <= _EPS or s >= total - _EPS:
            continue
        add(s, ("pass-waypoint", k))
    add(total, ("end-of-path",))

    for region, fid in trigger_regions:
        for crossing in path_region_crossings(path, region):
            add(crossing.arclength,
                ("passive-sensor-update", fid, crossing.kind == "enter"))

    for _, region in mode_regions:
        for crossing in path_region_crossings(path, region):
            add(crossing.arclength, None)  # bare cut; mode change found below

    cuts = sorted(s for s in marks if s > _EPS)
    gap_modes: list[str] = []
    prev = 0.0
    for s in cuts:
        gap_modes.append(prevailing((prev + s) / 2.0))
        prev = s

    entries: list[ScheduleEntry] = []
    start_events = [ev for s, evs in marks.items() if s <= _EPS for ev in evs]
    if gap_modes and initial_mode is not None and gap_modes[0] != initial_mode:
        start_events.insert(0, ("set-travel-mode", gap_modes[0]))
    if start_events:
        mode0 = gap_modes[0] if gap_modes else (initial_mode or prevailing(0.0))
        entries.append(ScheduleEntry(0.0, path.point_at(0.0),
                                     tuple(start_events), 0.0, mode0))

    pending_dt = 0.0
    prev = 0.0
    for i, s in enumerate(cuts):
        gap_mode = gap_modes[i]
        speed = speeds.get(gap_mode, 0.0)
        if speed <= 0.0:
            raise ZeroSpeedMode(f"no positive speed for mode {gap_mode!r}")
        dt = (s - prev) / speed + pending_dt
        events = list(marks[s])
        if i + 1 < len(gap_modes) and gap_modes[i + 1] != gap_mode:
            events.append(("set-travel-mode", gap_modes[i + 1]))
        if not events:
            pending_dt = dt
            prev = s
            continue
        entries.append(ScheduleEntry(dt, path.point_at(s), tuple(events),
                                     s, gap_mode))
        pending_dt = 0.0
        prev = s
    return EndogenousEventSchedule(tuple(entries))


# --- navigation state -----------------------------------------------------------

@dataclass
class NavPrimitiveState:
    """Projection-time record of one running navigation primitive.

    sleeping_until mirrors the expiry of the pending persist
    ``sleeping(nav_id)`` occasion; the primitive is inert between entries
    and the projector advances it exactly at that date.
    """

    nav_id: int
    path: Polyline
    schedule: EndogenousEventSchedule
    trigger_regions: tuple  # (Region, fluent id) pairs, kept for rescheduling
    mode_regions: list
    speeds: dict
    default_mode: str
    next_index: int = 0
    entry_date: float = 0.0
    entry_arclength: float = 0.0
    sleeping_until: float = 0.0
    travel_mode: str = "office"
    factor: float = 1.0
    leg_index: int = 1
    epoch: int = 0
    done: bool = False

    @property
    def mode_id(self) -> str:
        suffix = "" if self.factor == 1.0 else f"*{self.factor:g}"
        return f"{self.travel_mode}{suffix}@wp{self.leg_index}"

    def speed_now(self) -> float:
        return self.speeds[self.travel_mode] * self.factor

    def arclength_at(self, t: float) -> float:
        s = self.entry_arclength + max(0.0, t - self.entry_date) * self.speed_now()
        return min(s, self.path.length)

    def position_at(self, t: float) -> Point:
        return self.path.point_at(self.arclength_at(t))

    def current_flow(self) -> dict:
        """Velocity vector on the current segment, as variable rates."""
        s = self.entry_arclength
        target_s = (self.schedule.entries[self.next_index].arclength
                    if self.next_index < len(self.schedule.entries)
                    else self.path.length)
        a = self.path.point_at(s)
        b = self.path.point_at(max(target_s, s))
        d = distance(a, b)
        if d <= 1e-12:
            return {"x": 0.0, "y": 0.0}
        v = self.speed_now()
        return {"x": v * (b.x - a.x) / d, "y": v * (b.y - a.y) / d}

    def destination(self) -> Point:
        return self.path.vertices[-1]

    def sleep_prop(self) -> Term:
        return ("sleeping", self.nav_id)


def reschedule_on_new_trigger(nav: NavPrimitiveState, new_networks,
                              t: float) -> NavPrimitiveState:
    """A fresh NavPrimitiveState whose remaining path is truncated at the
    position interpolated for date t and rescheduled with the extra
    trigger regions merged in.

    new_networks items are either fluent networks (compiled to regions,
    NotCompilable propagating) or ready (region, fluent id) pairs.
    Already-present pairs are not duplicated, so reapplying the same call
    to its own result gives a structurally equal state.
    """
    extra = []
    for i, item in enumerate(new_networks):
        if isinstance(item, tuple) and len(item) == 2:
            cond, fid = item
        else:
            cond, fid = item, f"net-{i}"
        region = cond if not isinstance(cond, fluents.Gate) \
            else fluents.compile_to_region(cond)
        extra.append((region, fid))
    regions = list(nav.trigger_regions)
    for pair in extra:
        if pair not in regions:
            regions.append(pair)
    rest = subpath(nav.path, nav.arclength_at(t))
    schedule = schedule_endogenous_events(
        rest, nav.mode_regions, tuple(regions), nav.speeds,
        default_mode=nav.default_mode, initial_mode=nav.travel_mode)
    return replace(nav, path=rest, schedule=schedule,
                   trigger_regions=tuple(regions), next_index=0,
                   entry_date=t, entry_arclength=0.0, done=False)


# --- sensing ---------------------------------------------------------------------

@dataclass(frozen=True)
class SensorSpec:
    detection_probability: float = 1.0
    false_positive: float = 0.0
    noise: float = 0.0
    range: float = 300.0

    def __post_init__(self):
        if not (0.0 <= self.detection_probability <= 1.0):
            raise ValueError("detection probability out of [0, 1]")
        if not (0.0 <= self.false_positive <= 1.0):
            raise ValueError("false-positive probability out of [0, 1]")
        if not self.range > 0:
            raise ValueError("sensor range must be positive")


@dataclass(frozen=True)
class SensorModel:
    sensors: tuple[tuple[str, SensorSpec], ...] = ()

    def spec(self, sensor: str) -> SensorSpec:
        for name, spec in self.sensors:
            if name == sensor:
                return spec
        return SensorSpec()


@dataclass
class WorldState:
    """What a sensing model may consult: static world plus live record."""

    world: World
    timeline: Timeline
    store: dict
    position: Point
    date: float


def apply_sensing_model(action, world_state: WorldState, model: SensorModel, rng):
    """Resolve one sensing action into (events, fluent settings, value).

    look-for collects matching objects within camera range, filters each
    through the detection probability, perturbs reported positions by
    the noise spec, and may add one false positive; the return value is
    the designator list.  estimate-door-angle reads the nearest in-range
    door's current angle plus noise.  A ('possible-bump', name) query
    resolves to a bump event when sonar coverage is off and to a
    path-blocked failure when it is on.
    """
    ws = world_state
    if isinstance(action, nodes.LookFor):
        spec = model.spec(action.camera)
        desired = tuple(action.description)
        designators = []
        for ob in ws.world.objects_near(ws.position, spec.range):
            if desired and ob.kind != desired[0]:
                continue
            color = _object_color(ws, ob.name)
            if len(desired) > 1 and color != desired[1]:
                continue
            if rng.random() >= spec.detection_probability:
                continue
            dx = rng.gauss(0.0, spec.noise) if spec.noise else 0.0
            dy = rng.gauss(0.0, spec.noise) if spec.noise else 0.0
            designators.append({
                "name": ob.name, "kind": ob.kind, "color": color,
                "x": ob.location.x + dx, "y": ob.location.y + dy,
            })
        if spec.false_positive and rng.random() < spec.false_positive:
            designators.append({
                "name": "phantom", "kind": desired[0] if desired else "object",
                "color": desired[1] if len(desired) > 1 else None,
                "x": ws.position.x, "y": ws.position.y,
            })
        events = [("obj-seen", d["name"]) for d in designators]
        settings = {"visual-inputs": len(designators)}
        if designators:
            settings["obs-pos-x"] = designators[0]["x"]
            settings["obs-pos-y"] = designators[0]["y"]
        return events, settings, designators
    if isinstance(action, nodes.EstimateDoorAngle):
        spec = model.spec("angle-sensor")
        doors = sorted(ws.world.doors.values(),
                       key=lambda d: (distance(d.center, ws.position), d.name))
        doors = [d for d in doors if distance(d.center, ws.position) <= spec.range]
        if not doors:
            return [], {}, None
        door = doors[0]
        open_now = ws.timeline.holds_at(door.prop, ws.date, "after")
        angle = door.open_angle if open_now else door.closed_angle
        reading = angle + (rng.gauss(0.0, spec.noise) if spec.noise else 0.0)
        return [("door-angle-estimated", door.name)], {"door-angle": reading}, reading
    if isinstance(action, tuple) and action and action[0] == "possible-bump":
        name = action[1]
        sonar_on = ws.timeline.holds_at(("obstacle-avoidance-with", "sonar"),
                                        ws.date, "after")
        if sonar_on:
            return [("path-blocked", name)], {}, "path blocked"
        return [("bump", name)], {"bump": True}, "bump"
    raise TypeError(f"not a sensing action: {action!r}")


def _object_color(ws: WorldState, name: str) -> str | None:
    ob = ws.world.objects.get(name)
    if ob is None:
        return None
    candidates = [ob.color] if ob.color else [c for c, _ in ob.color_distribution]
    for c in candidates:
        if ws.timeline.holds_at(("color", name, c), ws.date, "after"):
            return c
    return ob.color


# --- exogenous prediction ---------------------------------------------------------

def predict_next_exogenous(tl: Timeline, ruleset: RuleSet, t_last: float,
                           t_next: float, condition, rng) -> Occurrence | None:
    """Earliest exogenous occurrence over (t_last, t_next), if any.

    ``condition`` is the set of propositions holding throughout the
    window; it is constant by construction, because schedule entries,
    expiries, and previously returned occurrences delimit every change
    point.  Each enabled Poisson rule instance fires with probability
    1 - e^(-width/spacing) at a uniform date in the window; the earliest
    winner is returned.  Trigger-idiom rules (spacing at or below the
    trigger threshold) are excluded here: the projection fires those
    deterministically at condition onset.
    """
    width = t_next - t_last
    if width <= 0:
        return None
    holding = list(condition)
    best: tuple[float, Term] | None = None
    for rule in ruleset.exo_rules:
        if rule.is_trigger:
            continue
        solutions = solve_condition_over(rule.condition, holding)
        solutions.sort(key=lambda b: sorted(b.items()))
        for b in solutions:
            p_fire = 1.0 - math.exp(-width / rule.spacing)
            if rng.random() < p_fire:
                t_star = t_last + rng.random() * width
                if best is None or t_star < best[0]:
                    best = (t_star, terms.substitute(rule.event, b))
    if best is None:
        return None
    return Occurrence(best[0], best[1], CLASS_PHYSICAL, 0)


# --- configuration ----------------------------------------------------------------

@dataclass(frozen=True)
class ProjectorConfig:
    pickup_duration: float = 2.0
    putdown_duration: float = 2.0
    estimate_duration: float = 1.0
    look_time: float = 2.0
    sensor_model: SensorModel = SensorModel()
    max_occurrences: int = 200_000
    max_chain: int = 200  # trigger-rule firings allowed at one instant


# --- the projection engine ----------------------------------------------------------

@dataclass(order=True)
class _QItem:
    date: float
    event_class: int
    seq: int
    payload: object = field(compare=False)


class _Projection:
    def __init__(self, plan, world: World, beliefs: BeliefState | None,
                 ruleset: RuleSet, seed, horizon: float,
                 config: ProjectorConfig | None, start: Point | None):
        self.world = world
        self.rules = ruleset
        self.horizon = float(horizon)
        self.cfg = config or ProjectorConfig()
        self.rng = random.Random(f"{seed}")
        self.tl = Timeline()
        self.heap: list[_QItem] = []
        self._push_seq = 0
        self.now = 0.0
        self.reschedules = 0
        self.exo_count = 0
        self.nav_legs = 0
        self.synthetic: dict[int, tuple[str, Region]] = {}
        self.trigger_memory: dict[tuple[str, str], bool] = {}
        self.deferred_done: list[tuple[int, bool, object]] = []

        if start is None:
            if "start" in world.locations:
                start = world.locations["start"]
            elif world.waypoints:
                start = world.waypoints[sorted(world.waypoints)[0]].point
            else:
                start = Point(0.0, 0.0)
        self.pos = start
        base = default_beliefs(world)
        self.beliefs = merge_beliefs(base, beliefs) if beliefs else base

        self.travel_mode = world.prevailing_mode(start)
        self.interp = Interpreter(plan, fluent_values={
            "robot-x": start.x, "robot-y": start.y, "now": 0.0,
            "travel-mode": self.travel_mode,
        })

    # -- small helpers -------------------------------------------------------------

    def push(self, date: float, event_class: int, payload) -> None:
        self._push_seq += 1
        heappush(self.heap, _QItem(date, event_class, self._push_seq, payload))

    def record(self, event: Term, event_class: int, opened=(), closed=(),
               mode: str | None = None) -> Occurrence:
        if len(self.tl.occurrences) >= self.cfg.max_occurrences:
            raise ProjectionError("too many occurrences; projection diverged")
        if mode is None:
            nav = self._active_nav()
            mode = nav.mode_id if nav else "idle"
        return self.tl.add_occurrence(
            self.now, event, event_class, x=self.pos.x, y=self.pos.y,
            mode=mode, opened=tuple(opened), closed=tuple(closed))

    def _active_nav(self) -> NavPrimitiveState | None:
        for req in self.interp.running_requests():
            nav = getattr(req, "nav", None)
            if nav is not None and not nav.done:
                return nav
        return None

    def _advance_clock(self, t: float) -> None:
        self.now = t
        nav = self._active_nav()
        if nav is not None:
            self.pos = nav.position_at(t)
        self.interp.store["now"] = t
        self.interp.set_fluent("robot-x", self.pos.x)
        self.interp.set_fluent("robot-y", self.pos.y)

    def _sync_props(self, opened, closed) -> None:
        for prop in closed:
            self.interp.set_fluent(fluent_id_for_term(prop), False)
        for prop in opened:
            self.interp.set_fluent(fluent_id_for_term(prop), True)

    def _apply_rules(self, event: Term) -> tuple[list, list]:
        applied = apply_effect_rules(self.tl, event, self.now,
                                     self.rules.effect_rules, self.rng)
        opened, closed = [], []
        for a in applied:
            opened.extend(a.opened)
            closed.extend(a.closed)
        self._sync_props(opened, closed)
        return opened, closed

    def _step_interpreter(self, event=None) -> None:
        reqs = self._step_raw(event if event is not None else Wakeup())
        self._handle_interp_output(reqs)

    def _step_raw(self, event) -> list:
        reqs = self.interp.step(event)
        for req in self.interp.aborted_requests:
            nav = getattr(req, "nav", None)
            if nav is not None and not nav.done:
                nav.done = True
                self.tl.clip_prop(nav.sleep_prop(), self.now)
        self._attach_synthetic_keys()
        return reqs

    def _handle_interp_output(self, reqs) -> None:
        queue = list(reqs)
        while queue:
            req = queue.pop(0)
            self._start_primitive(req)
        while self.deferred_done:
            req_id, ok, payload = self.deferred_done.pop(0)
            reqs2 = self._step_raw(PrimitiveDone(req_id, ok, payload))
            self._handle_interp_output(reqs2)

    # -- primitives ------------------------------------------------------------------

    def _start_primitive(self, req) -> None:
        act = req.action
        if isinstance(act, (nodes.MoveTo, nodes.GoTo, nodes.LowLevelNavPlan)):
            self._start_nav(req)
            return
        if isinstance(act, nodes.SetNavigationMode):
            opened, closed = self._apply_rules(("set-navigation-mode", act.mode))
            self.record(("set-navigation-mode", act.mode), CLASS_COMPUTATIONAL,
                        opened, closed)
            self.interp.set_fluent("navigation-mode", act.mode)
            self.deferred_done.append((req.request_id, True, None))
            return
        if isinstance(act, nodes.PickUp):
            event = ("begin", ("pick-up", act.obj))
            opened, closed = self._apply_rules(event)
            self.record(event, CLASS_PHYSICAL, opened, closed)
            self.push(self.now + self.cfg.pickup_duration, CLASS_PHYSICAL,
                      ("prim-done", req.request_id, ("end", ("pick-up", act.obj))))
            return
        if isinstance(act, nodes.PutDown):
            event = ("begin", ("put-down", act.obj))
            opened, closed = self._apply_rules(event)
            self.record(event, CLASS_PHYSICAL, opened, closed)
            self.push(self.now + self.cfg.putdown_duration, CLASS_PHYSICAL,
                      ("prim-done", req.request_id, ("end", ("put-down", act.obj))))
            return
        if isinstance(act, nodes.LookFor):
            event = ("begin", ("look-for",) + tuple(act.description))
            opened, closed = self._apply_rules(event)
            self.record(event, CLASS_SENSOR, opened, closed)
            self.push(self.now + self.cfg.look_time, CLASS_SENSOR,
                      ("sense-done", req.request_id))
            return
        if isinstance(act, nodes.EstimateDoorAngle):
            event = ("begin", ("estimate-door-angle",))
            opened, closed = self._apply_rules(event)
            self.record(event, CLASS_SENSOR, opened, closed)
            self.push(self.now + self.cfg.estimate_duration, CLASS_SENSOR,
                      ("sense-done", req.request_id))
            return
        raise ProjectionError(f"no projection model for primitive {act!r}")

    def _trigger_pairs(self) -> tuple:
        out = []
        for fid in sorted(self.world.triggers):
            out.append((self.world.triggers[fid], fid))
        for name in sorted(self.world.doors):
            door = self.world.doors[name]
            out.append((door.passing_region, f"passing-{name}"))
        for name in sorted(self.world.obstacles):
            out.append((self.world.obstacles[name], f"obstacle/{name}"))
        for uid in sorted(self.synthetic):
            key, region = self.synthetic[uid]
            out.append((region, key))
        return tuple(out)

    def _start_nav(self, req) -> None:
        act = req.action
        if isinstance(act, nodes.MoveTo):
            if self._nav_already_there(req, act.target):
                return
            path = Polyline((self.pos, act.target))
        elif isinstance(act, nodes.GoTo):
            dst = self.world.location_point(act.location)
            if self._nav_already_there(req, dst):
                return
            path = self.world.route(self.pos, dst)
        elif act.path is not None:
            verts = act.path.vertices
            if distance(self.pos, verts[0]) > _EPS:
                verts = (self.pos,) + verts
            path = Polyline(verts)
        else:
            dst = self.world.location_point(act.dest)
            if self._nav_already_there(req, dst):
                return
            path = self.world.route(self.pos, dst)
        pairs = self._trigger_pairs()
        schedule = schedule_endogenous_events(
            path, self.world.mode_regions, pairs, self.world.speeds,
            default_mode=self.world.default_mode, initial_mode=self.travel_mode)
        nav = NavPrimitiveState(
            nav_id=req.request_id, path=path, schedule=schedule,
            trigger_regions=pairs, mode_regions=self.world.mode_regions,
            speeds=dict(self.world.speeds), default_mode=self.world.default_mode,
            entry_date=self.now, travel_mode=self.travel_mode)
        req.nav = nav
        self.nav_legs += 1
        event = ("begin", ("follow-path", req.request_id))
        opened, closed = self._apply_rules(event)
        self.record(event, CLASS_PHYSICAL, opened, closed, mode=nav.mode_id)
        self._queue_next_entry(req)

    def _nav_already_there(self, req, dst: Point) -> bool:
        """Complete a navigation instantly when the robot already stands at
        its destination.  The begin and end of the path following collapse
        onto the same date; no endogenous events are scheduled."""
        if distance(self.pos, dst) > _EPS:
            return False
        mode = f"{self.travel_mode}@wp0"
        for event in (("begin", ("follow-path", req.request_id)),
                      ("end", ("follow-path", req.request_id))):
            opened, closed = self._apply_rules(event)
            self.record(event, CLASS_PHYSICAL, opened, closed, mode=mode)
        self.deferred_done.append((req.request_id, True, None))
        return True

    def _queue_next_entry(self, req) -> None:
        nav: NavPrimitiveState = req.nav
        if nav.next_index >= len(nav.schedule.entries):
            self._finish_nav(req, ok=True, payload=None)
            return
        entry = nav.schedule.entries[nav.next_index]
        dt_eff = entry.dt / nav.factor
        nav.sleeping_until = self.now + dt_eff
        self.tl.assert_prop(nav.sleep_prop(), self.now, expiry=nav.sleeping_until)
        self.push(nav.sleeping_until, CLASS_PHYSICAL,
                  ("nav-entry", req.request_id, nav.epoch, nav.next_index))

    def _finish_nav(self, req, ok: bool, payload) -> None:
        nav: NavPrimitiveState = req.nav
        nav.done = True
        self.tl.clip_prop(nav.sleep_prop(), self.now)
        event = ("end", ("follow-path", req.request_id))
        opened, closed = self._apply_rules(event)
        self.record(event, CLASS_PHYSICAL, opened, closed, mode=nav.mode_id)
        self._step_interpreter(PrimitiveDone(req.request_id, ok, payload))

    # -- pending-condition bookkeeping ---------------------------------------------

    def _attach_synthetic_keys(self) -> None:
        added = self.interp.pending_added
        self.interp.pending_added = []
        removed = self.interp.pending_removed
        self.interp.pending_removed = []
        for pc in removed:
            self.synthetic.pop(pc.uid, None)
        new_pairs = []
        for pc in added:
            inputs = fluents.network_inputs(pc.net)
            if not inputs or not inputs <= {"robot-x", "robot-y"}:
                continue
            try:
                region = fluents.compile_to_region(pc.net)
            except fluents.NotCompilable:
                continue
            key = f"__trig/{pc.uid}"
            pc.synthetic_key = key
            self.synthetic[pc.uid] = (key, region)
            self.interp.set_fluent(key, point_in_region(self.pos, region))
            new_pairs.append((region, key))
        if new_pairs:
            self._reschedule_running(new_pairs)

    def _reschedule_running(self, new_pairs) -> None:
        for req in self.interp.running_requests():
            nav = getattr(req, "nav", None)
            if nav is None or nav.done:
                continue
            self.tl.clip_prop(nav.sleep_prop(), self.now)
            fresh = reschedule_on_new_trigger(nav, new_pairs, self.now)
            fresh.epoch = nav.epoch + 1
            req.nav = fresh
            self.reschedules += 1
            self._queue_next_entry(req)

    # -- trigger-idiom rules ----------------------------------------------------------

    def _scan_trigger_rules(self) -> int:
        """Fire trigger-idiom exogenous rules on rising condition edges."""
        fired = 0
        holding = self.tl.holding(self.now, "after")
        for rule in self.rules.exo_rules:
            if not rule.is_trigger:
                continue
            solutions = solve_condition_over(rule.condition, holding)
            seen = set()
            for b in sorted(solutions, key=lambda b: sorted(b.items())):
                event = terms.substitute(rule.event, b)
                key = (rule.name, terms.render(event))
                seen.add(key)
                if not self.trigger_memory.get(key, False):
                    self.trigger_memory[key] = True
                    self._process_event_term(event, CLASS_PHYSICAL)
                    fired += 1
            for key in [k for k in self.trigger_memory if k[0] == rule.name]:
                if key not in seen:
                    self.trigger_memory[key] = False
        return fired

    def _settle_triggers(self) -> None:
        for _ in range(self.cfg.max_chain):
            if self._scan_trigger_rules() == 0:
                return
        raise ProjectionError("trigger rules keep firing at one instant")

    # -- event processing --------------------------------------------------------------

    def _process_event_term(self, event: Term, event_class: int) -> None:
        opened, closed = self._apply_rules(event)
        self.record(event, event_class, opened, closed)
        self._step_interpreter()

    def _process_expiry(self, prop: Term) -> None:
        self.tl.clip_prop(prop, self.now)
        self._sync_props((), (prop,))
        self.record(("expire", prop), CLASS_COMPUTATIONAL, (), (prop,))
        self._step_interpreter()

    def _process_item(self, item: _QItem) -> None:
        payload = item.payload
        kind = payload[0]
        if kind == "nav-entry":
            _, req_id, epoch, index = payload
            req = self.interp.requests.get(req_id)
            nav = getattr(req, "nav", None) if req else None
            if (req is None or nav is None or nav.done or req.aborted
                    or req.completed or nav.epoch != epoch
                    or nav.next_index != index):
                return
            entry = nav.schedule.entries[index]
            self.tl.clip_prop(nav.sleep_prop(), self.now)
            nav.entry_date = self.now
            nav.entry_arclength = entry.arclength
            nav.next_index = index + 1
            self.pos = entry.vals
            self._emit_entry_events(req, nav, entry)
            nav2 = getattr(req, "nav", None)
            if (nav2 is nav and not nav2.done and not req.aborted
                    and not req.completed and nav2.next_index == index + 1):
                self._queue_next_entry(req)
            return
        if kind == "prim-done":
            _, req_id, event = payload
            req = self.interp.requests.get(req_id)
            if req is None or req.aborted or req.completed:
                return
            opened, closed = self._apply_rules(event)
            self.record(event, CLASS_PHYSICAL, opened, closed)
            self._step_interpreter(PrimitiveDone(req_id, True, None))
            return
        if kind == "sense-done":
            _, req_id = payload
            req = self.interp.requests.get(req_id)
            if req is None or req.aborted or req.completed:
                return
            ws = WorldState(self.world, self.tl, self.interp.store, self.pos,
                            self.now)
            events, settings, value = apply_sensing_model(
                req.action, ws, self.cfg.sensor_model, self.rng)
            for fid, val in settings.items():
                self.interp.set_fluent(fid, val)
            head = (("look-for",) + tuple(req.action.description)
                    if isinstance(req.action, nodes.LookFor)
                    else ("estimate-door-angle",))
            opened, closed = self._apply_rules(("end", head))
            self.record(("end", head), CLASS_SENSOR, opened, closed)
            for ev in events:
                op2, cl2 = self._apply_rules(ev)
                self.record(ev, CLASS_SENSOR, op2, cl2)
            self._step_interpreter(PrimitiveDone(req_id, True, value))
            return
        raise ProjectionError(f"unknown queue payload {payload!r}")

    def _emit_entry_events(self, req, nav: NavPrimitiveState,
                           entry: ScheduleEntry) -> None:
        for ev in entry.events:
            if req.nav is not nav or nav.done or req.aborted or req.completed:
                return
            head = ev[0]
            if head == "pass-waypoint":
                opened, closed = self._apply_rules(ev)
                nav.leg_index += 1
                self.record(ev, CLASS_PHYSICAL, opened, closed, mode=nav.mode_id)
                self._step_interpreter()
            elif head == "set-travel-mode":
                self._handle_mode_change(nav, ev[1])
            elif head == "passive-sensor-update":
                self._handle_sensor_update(req, nav, ev[1], ev[2])
            elif head == "end-of-path":
                self._finish_nav(req, ok=True, payload=None)
            else:
                self._process_event_term(ev, CLASS_PHYSICAL)

    def _handle_mode_change(self, nav: NavPrimitiveState, mode: str) -> None:
        nav.travel_mode = mode
        self.travel_mode = mode
        split = self.world.mode_variants.get(mode)
        if split is None:
            nav.factor = 1.0
        else:
            draw = random_number(self.tl, 2 ** split.denom_power, self.rng)
            cursor = 1
            nav.factor = split.factors[-1][0]
            for f, size in split.factors:
                if cursor <= draw <= cursor + size - 1:
                    nav.factor = f
                    break
                cursor += size
        event = ("set-travel-mode", mode)
        opened, closed = self._apply_rules(event)
        self.interp.set_fluent("travel-mode", mode)
        self.record(event, CLASS_PHYSICAL, opened, closed, mode=nav.mode_id)
        self._step_interpreter()

    def _handle_sensor_update(self, req, nav, fid: str, value: bool) -> None:
        if fid.startswith("passing-"):
            door_name = fid[len("passing-"):]
            door = self.world.doors.get(door_name)
            if door is not None and value:
                if self.interp.store.get(fid, False):
                    return  # already passing; a reschedule re-found the edge
                if not self.tl.holds_at(door.prop, self.now, "after"):
                    self._hit_obstruction(req, nav, door_name)
                    return
                event = ("start-passing-door", door_name)
                opened, closed = self._apply_rules(event)
                self.interp.set_fluent(fid, True)
                self.record(event, CLASS_PHYSICAL, opened, closed, mode=nav.mode_id)
                self._step_interpreter()
                return
            if door is not None:
                if not self.interp.store.get(fid, False):
                    return  # never started passing
                event = ("finish-passing-door", door_name)
                opened, closed = self._apply_rules(event)
                self.interp.set_fluent(fid, False)
                self.record(event, CLASS_PHYSICAL, opened, closed, mode=nav.mode_id)
                self._step_interpreter()
                return
        if fid.startswith("obstacle/"):
            if value:
                self._hit_obstruction(req, nav, fid[len("obstacle/"):])
            return
        if fid.startswith("__trig/"):
            live = {key for key, _ in self.synthetic.values()}
            if fid not in live:
                return  # condition already resolved; stale schedule entry
        event = ("passive-sensor-update", fid, value)
        opened, closed = self._apply_rules(event)
        self.interp.set_fluent(fid, value)
        self.record(event, CLASS_SENSOR, opened, closed)
        self._step_interpreter()

    def _hit_obstruction(self, req, nav: NavPrimitiveState, name: str) -> None:
        ws = WorldState(self.world, self.tl, self.interp.store, self.pos, self.now)
        events, settings, value = apply_sensing_model(
            ("possible-bump", name), ws, self.cfg.sensor_model, self.rng)
        for ev in events:
            opened, closed = self._apply_rules(ev)
            self.record(ev, CLASS_PHYSICAL, opened, closed, mode=nav.mode_id)
        nav.done = True
        self.tl.clip_prop(nav.sleep_prop(), self.now)
        end_event = ("end", ("follow-path", req.request_id))
        opened, closed = self._apply_rules(end_event)
        self.record(end_event, CLASS_PHYSICAL, opened, closed, mode=nav.mode_id)
        if settings.get("bump"):
            self.interp.set_fluent("bump", True)
        self._step_interpreter(PrimitiveDone(req.request_id, False, value))
        if settings.get("bump"):
            self.interp.set_fluent("bump", False)

    # -- main loop -----------------------------------------------------------------------

    def run(self) -> Timeline:
        props = self.beliefs.sample(self.rng)
        for prop in props:
            self.tl.assert_prop(prop, 0.0)
        self._sync_props(props, ())
        self.record(("start",), CLASS_COMPUTATIONAL, opened=props)
        self._settle_triggers()
        self._step_interpreter()
        self._settle_triggers()

        while not self.interp.done:
            t_heap = self.heap[0].date if self.heap else math.inf
            exp = self.tl.next_expiry(self.now)
            t_exp = exp[0] if exp is not None else math.inf
            t_next = min(t_heap, t_exp, self.horizon)
            holding = self.tl.holding(self.now, "after")
            exo = predict_next_exogenous(self.tl, self.rules, self.now, t_next,
                                         holding, self.rng)
            if exo is not None:
                self._advance_clock(exo.date)
                self.exo_count += 1
                self._process_event_term(exo.event, exo.event_class)
            elif t_exp < t_heap - 1e-12 and t_exp <= self.horizon:
                self._advance_clock(t_exp)
                self._process_expiry(exp[1])
            elif t_heap <= self.horizon:
                item = heappop(self.heap)
                self._advance_clock(item.date)
                self._process_item(item)
            else:
                self._finish_horizon()
            self._settle_triggers()

        self.tl.stats = self._stats()
        return self.tl

    def _stats(self) -> dict:
        return {
            "events": len(self.tl.occurrences),
            "reschedules": self.reschedules,
            "nav_legs": self.nav_legs,
            "exogenous": self.exo_count,
        }

    def _finish_horizon(self):
        self.tl.horizon_exceeded = True
        self.tl.stats = self._stats()
        raise HorizonExceeded(
            f"plan still running at horizon {self.horizon}", self.tl)


def project_plan(plan, world: World, beliefs: BeliefState | None,
                 ruleset: RuleSet, seed, horizon: float,
                 config: ProjectorConfig | None = None,
                 start: Point | None = None) -> Timeline:
    """Project one scenario of a plan; the returned timeline is the record.

    Sampled belief propositions open at the distinct start occurrence.
    Raises HorizonExceeded (partial timeline attached) when the plan is
    still running at the horizon, and propagates DeadlockDetected from
    the interpreter.  Identical inputs and seed give byte-identical
    timelines.
    """
    return _Projection(plan, world, beliefs, ruleset, seed, horizon,
                       config, start).run()
