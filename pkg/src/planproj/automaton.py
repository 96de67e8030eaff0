"""Probabilistic hybrid automata over piecewise-linear flows.

A control mode fixes a flow vector for the state variables; within a
mode the valuation at time t is vals0 + (t - t0) * flow.  Jump edges
carry a condition (a region over <x, y>, or a fluent network the
interpreter evaluates), plus a successor distribution written as
consecutive integer ranges out of [1, 2**n]: successor [i, j] is chosen
when an n-bit uniform draw lands in it, so its probability is the
dyadic (j - i + 1) / 2**n.

Mode identifiers read ``<travel-mode>[*<factor>]@wp<k>``: the travel
mode, an optional speed-variant factor, and the index of the waypoint
the robot is heading for.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import fluents
from .geom2d import Point, point_in_region, region_from_json, region_to_json


class AutomatonInvalid(Exception):
    """The automaton violates a structural requirement."""


class TimeBeforeAnchor(Exception):
    """Interpolation was asked for a time before the state's anchor."""


class NonCompilableCondition(Exception):
    """A jump condition has no region form (kept network-valued instead)."""


@dataclass(frozen=True)
class SuccessorRange:
    """One successor: chosen when the dyadic draw lands in [lo, hi]."""

    mode_id: str
    lo: int
    hi: int


@dataclass(frozen=True)
class JumpEdge:
    """condition: a Region, a fluent network (interpreter-evaluated), or
    None for edges driven purely by a dwell bound."""

    from_mode: str
    edge_id: str
    condition: object
    successors: tuple[SuccessorRange, ...]
    denom_power: int = 0
    max_dwell: float | None = None

    def __post_init__(self):
        report = validate_edge(self)
        if report:
            raise AutomatonInvalid("; ".join(report))

    def successor_for(self, draw: int) -> str:
        for s in self.successors:
            if s.lo <= draw <= s.hi:
                return s.mode_id
        raise AssertionError(f"draw {draw} outside [1, {2 ** self.denom_power}]")

    def probability_of(self, mode_id: str) -> float:
        total = 2 ** self.denom_power
        return sum(s.hi - s.lo + 1 for s in self.successors
                   if s.mode_id == mode_id) / total


@dataclass(frozen=True)
class ControlMode:
    mode_id: str
    flow: tuple[tuple[str, float], ...]  # (state variable, rate) pairs
    edges: tuple[JumpEdge, ...] = ()
    initial_values: tuple[tuple[str, float], ...] | None = None
    travel_mode: str | None = None

    def __post_init__(self):
        for _, rate in self.flow:
            if not math.isfinite(rate):
                raise AutomatonInvalid(f"mode {self.mode_id!r} has non-finite flow")

    def flow_map(self) -> dict:
        return dict(self.flow)


def make_mode(mode_id: str, flow: dict, edges=(), initial_values=None,
              travel_mode=None) -> ControlMode:
    """ControlMode from plain dicts (flows are stored as sorted pairs)."""
    iv = tuple(sorted(initial_values.items())) if initial_values else None
    return ControlMode(mode_id, tuple(sorted(flow.items())), tuple(edges),
                       iv, travel_mode)


@dataclass
class ModeGraph:
    """A complete mode/edge map, used by the clock-tick reference
    projector and by hand-built fixtures."""

    modes: dict[str, ControlMode]
    initial: str
    initial_values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.initial not in self.modes:
            raise AutomatonInvalid(f"initial mode {self.initial!r} is undefined")
        report = validate_automaton(
            [e for m in self.modes.values() for e in m.edges],
            known_modes=set(self.modes))
        for mid, mode in self.modes.items():
            if mode.mode_id != mid:
                report.append(f"mode registered as {mid!r} names itself "
                              f"{mode.mode_id!r}")
        if report:
            raise AutomatonInvalid("; ".join(report))

    def mode(self, mode_id: str) -> ControlMode:
        return self.modes[mode_id]


@dataclass
class AutomatonState:
    """mode + anchored valuation + flow; exactly one of each at a time."""

    mode: str
    values_at: tuple[float, dict]  # (t0, vals0)
    flow: dict
    now: float


def state_var_vals(state: AutomatonState, t: float) -> dict:
    """Valuation at time t: vals0 + (t - t0) * flow."""
    t0, vals0 = state.values_at
    if t < t0 - 1e-12:
        raise TimeBeforeAnchor(f"t={t} precedes anchor t0={t0}")
    dt = max(0.0, t - t0)
    return {var: v0 + dt * state.flow.get(var, 0.0) for var, v0 in vals0.items()}


def state_position(state: AutomatonState, t: float) -> Point:
    vals = state_var_vals(state, t)
    return Point(vals["x"], vals["y"])


def sample_successor_mode(edge: JumpEdge, rng, tl=None) -> str:
    """Draw the successor by an n-bit uniform integer over [1, 2**n].

    The draw is assembled from fair bits (one per binary digit), so each
    successor's chance is exactly its range size over 2**n.
    """
    from .rules import random_number

    if edge.denom_power == 0:
        return edge.successors[0].mode_id
    draw = random_number(tl, 2 ** edge.denom_power, rng)
    return edge.successor_for(draw)


def enabled_edges(mode: ControlMode, state: AutomatonState, t: float,
                  store: dict | None = None) -> list[JumpEdge]:
    """Edges whose condition holds at time t (regions against the
    interpolated position, networks against the store, dwell bounds
    against time in mode)."""
    out = []
    pos = None
    for edge in mode.edges:
        cond = edge.condition
        if cond is None:
            if edge.max_dwell is not None and t - state.values_at[0] >= edge.max_dwell:
                out.append(edge)
            continue
        if isinstance(cond, fluents.Gate):
            if store is not None and fluents.eval_network(cond, store):
                out.append(edge)
            continue
        if pos is None:
            pos = state_position(state, t)
        if point_in_region(pos, cond):
            out.append(edge)
    return out


# --- validation -----------------------------------------------------------------

def validate_edge(edge: JumpEdge) -> list[str]:
    report = []
    total = 2 ** edge.denom_power
    if edge.denom_power < 0:
        report.append(f"edge {edge.edge_id!r}: negative denominator power")
        return report
    if not edge.successors:
        report.append(f"edge {edge.edge_id!r}: no successors")
        return report
    spans = sorted((s.lo, s.hi, s.mode_id) for s in edge.successors)
    cursor = 1
    for lo, hi, mid in spans:
        if not (isinstance(lo, int) and isinstance(hi, int)):
            report.append(f"edge {edge.edge_id!r}: range boundaries must be "
                          f"integers, got [{lo}, {hi}]")
            return report
        if lo > hi:
            report.append(f"edge {edge.edge_id!r}: empty range [{lo}, {hi}]")
        if lo < cursor:
            report.append(f"edge {edge.edge_id!r}: ranges overlap at {lo}")
        elif lo > cursor:
            report.append(f"edge {edge.edge_id!r}: gap before {lo}")
        cursor = max(cursor, hi + 1)
    if cursor != total + 1:
        report.append(f"edge {edge.edge_id!r}: ranges cover [1, {cursor - 1}], "
                      f"need [1, {total}]")
    return report


def validate_automaton(edges, known_modes=None) -> list[str]:
    """Structural check over a set of edges; empty report means valid.

    Checks each edge's range partition (non-overlapping, gap-free,
    integer boundaries, full cover of [1, 2**n]) and, when known_modes
    is given, that every successor mode exists.
    """
    report = []
    for edge in edges:
        report.extend(validate_edge(edge))
        if known_modes is not None:
            if edge.from_mode != "*" and edge.from_mode not in known_modes:
                report.append(f"edge {edge.edge_id!r}: unknown source mode "
                              f"{edge.from_mode!r}")
            for s in edge.successors:
                if s.mode_id != "*" and s.mode_id not in known_modes:
                    report.append(f"edge {edge.edge_id!r}: unknown successor "
                                  f"mode {s.mode_id!r}")
    return report


def quantize_to_ranges(weighted_modes, denom_power: int = 16):
    """Turn (mode, probability) pairs into consecutive dyadic ranges.

    Probabilities are rounded to the nearest i/2**denom_power; rounding
    drift is absorbed by the last range.  Returns (successors, warnings)
    where warnings lists every probability that was not already dyadic.
    """
    total = 2 ** denom_power
    warnings = []
    sizes = []
    for mode_id, p in weighted_modes:
        exact = p * total
        size = round(exact)
        if abs(exact - size) > 1e-9:
            warnings.append(f"probability {p} for {mode_id!r} rounded to "
                            f"{size}/{total}")
        sizes.append([mode_id, size])
    drift = total - sum(s for _, s in sizes)
    if drift != 0:
        sizes[-1][1] += drift
        warnings.append(f"range sizes adjusted by {drift} to cover [1, {total}]")
    succ = []
    cursor = 1
    for mode_id, size in sizes:
        if size <= 0:
            raise AutomatonInvalid(f"mode {mode_id!r} quantizes to zero weight")
        succ.append(SuccessorRange(mode_id, cursor, cursor + size - 1))
        cursor += size
    return tuple(succ), warnings


# --- construction from interpreter state ------------------------------------------

def build_automaton_from_state(interp, world) -> tuple[AutomatonState, list[JumpEdge]]:
    """Read the local hybrid-automaton view off a quiescent interpreter.

    The state's mode/flow come from the running navigation primitive (its
    projection-time record rides on the request's ``nav`` attribute);
    edges are one per pending wait-for/whenever condition plus one per
    running primitive's completion.  Conditions compile to regions where
    possible; otherwise the edge keeps the network and is marked
    interpreter-evaluated.  A condition matching a travel-mode band that
    has configured speed variants carries the dyadic variant split as its
    successor distribution; all other successors are wildcards.
    """
    now = float(interp.store.get("now", 0.0))
    x = float(interp.store.get("robot-x", 0.0))
    y = float(interp.store.get("robot-y", 0.0))

    mode_id = "idle"
    flow = {"x": 0.0, "y": 0.0}
    navs = []
    for req in interp.running_requests():
        nav = getattr(req, "nav", None)
        if nav is not None:
            navs.append((req, nav))
    if navs:
        req, nav = navs[0]
        mode_id = nav.mode_id
        flow = dict(nav.current_flow())
    state = AutomatonState(mode_id, (now, {"x": x, "y": y}), flow, now)

    edges: list[JumpEdge] = []
    for pc in interp.pending_items():
        cond: object
        try:
            cond = fluents.compile_to_region(pc.net)
        except fluents.NotCompilable:
            cond = pc.net
        succ, power = _variant_successors(cond, world, navs)
        edges.append(JumpEdge(mode_id, f"cond/{pc.uid}", cond, succ, power))
    for req, nav in navs:
        region = world.arrival_region(nav.destination())
        edges.append(JumpEdge(mode_id, f"done/{req.request_id}", region,
                              (SuccessorRange("*", 1, 1),), 0))
    for req in interp.running_requests():
        if getattr(req, "nav", None) is None:
            edges.append(JumpEdge(mode_id, f"done/{req.request_id}", None,
                                  (SuccessorRange("*", 1, 1),), 0,
                                  max_dwell=0.0))
    return state, edges


def _variant_successors(cond, world, navs):
    """Dyadic variant split for a condition that gates entry into a
    travel-mode band with configured speed variants; wildcard otherwise."""
    splits = getattr(world, "mode_variants", None) or {}
    regions = getattr(world, "mode_regions", None) or []
    for mode_name, region in regions:
        if mode_name in splits and cond == region:
            split = splits[mode_name]
            wp = navs[0][1].leg_index if navs else 1
            pairs = []
            for factor, size in split.factors:
                suffix = "" if factor == 1.0 else f"*{factor:g}"
                pairs.append((f"{mode_name}{suffix}@wp{wp}", size))
            succ = []
            cursor = 1
            for mid, size in pairs:
                succ.append(SuccessorRange(mid, cursor, cursor + size - 1))
                cursor += size
            return tuple(succ), split.denom_power
    return (SuccessorRange("*", 1, 1),), 0


@dataclass(frozen=True)
class VariantSplit:
    """Speed variants for one travel mode: (factor, range size) out of
    2**denom_power equal parts."""

    factors: tuple[tuple[float, int], ...]
    denom_power: int

    def __post_init__(self):
        total = sum(size for _, size in self.factors)
        if total != 2 ** self.denom_power:
            raise AutomatonInvalid(
                f"variant sizes sum to {total}, need {2 ** self.denom_power}")


# --- (de)serialization --------------------------------------------------------

def _condition_to_json(cond) -> dict | None:
    if cond is None:
        return None
    if isinstance(cond, fluents.Gate):
        from .sexpr import render
        return {"kind": "network", "text": render(fluents.network_to_sexpr(cond))}
    return region_to_json(cond)


def _condition_from_json(data):
    if data is None:
        return None
    if data.get("kind") == "network":
        from .sexpr import parse_one
        return fluents.network_from_snode(parse_one(data["text"]))
    return region_from_json(data)


def edge_to_json(edge: JumpEdge) -> dict:
    return {
        "from": edge.from_mode,
        "id": edge.edge_id,
        "condition": _condition_to_json(edge.condition),
        "denom_power": edge.denom_power,
        "max_dwell": edge.max_dwell,
        "successors": [{"mode": s.mode_id, "lo": s.lo, "hi": s.hi}
                       for s in edge.successors],
    }


def edge_from_json(data: dict) -> JumpEdge:
    return JumpEdge(
        data["from"], data["id"], _condition_from_json(data.get("condition")),
        tuple(SuccessorRange(s["mode"], int(s["lo"]), int(s["hi"]))
              for s in data["successors"]),
        int(data.get("denom_power", 0)), data.get("max_dwell"),
    )


def graph_to_json(graph: ModeGraph) -> dict:
    return {
        "initial": graph.initial,
        "initial_values": {k: graph.initial_values[k]
                           for k in sorted(graph.initial_values)},
        "modes": {
            mid: {
                "flow": {k: v for k, v in mode.flow},
                "travel_mode": mode.travel_mode,
                "initial_values": (dict(mode.initial_values)
                                   if mode.initial_values else None),
                "edges": [edge_to_json(e) for e in mode.edges],
            }
            for mid, mode in sorted(graph.modes.items())
        },
    }


def graph_from_json(data: dict) -> ModeGraph:
    modes = {}
    for mid, m in data["modes"].items():
        modes[mid] = make_mode(
            mid, dict(m.get("flow", {})),
            tuple(edge_from_json(e) for e in m.get("edges", [])),
            m.get("initial_values"), m.get("travel_mode"),
        )
    return ModeGraph(modes, data["initial"], dict(data.get("initial_values", {})))


def dump_graph(graph: ModeGraph) -> str:
    return json.dumps(graph_to_json(graph), indent=2, sort_keys=True) + "\n"
