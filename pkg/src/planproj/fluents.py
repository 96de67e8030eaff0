"""Fluents and fluent networks.

A fluent is a named time-varying value (boolean or real); some fluents
measure a continuous state variable (robot-x measures x).  Plans wait on
fluent networks: gate dags over fluent inputs with comparison and boolean
gates.  Networks whose only non-constant inputs measure x and y compile
to trigger regions, which is how waiting threads become geometry the
scheduler can see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

from . import geom2d
from .geom2d import Point, Region
from .sexpr import SexprError, SNode


class UnboundInput(Exception):
    def __init__(self, fluent_id: str):
        super().__init__(f"network input {fluent_id!r} has no binding")
        self.fluent_id = fluent_id


class NotCompilable(Exception):
    """Raised by compile_to_region, naming the gate that has no region form."""

    def __init__(self, gate):
        super().__init__(f"no region form for gate {gate!r}")
        self.gate = gate


@dataclass(frozen=True)
class Fluent:
    """Declaration of a fluent: id, value kind, optional measured state var."""

    id: str
    kind: str = "boolean"  # 'boolean' | 'real'
    measures: str | None = None  # state variable name, e.g. 'x'


@dataclass(frozen=True)
class Const:
    value: float | bool


@dataclass(frozen=True)
class Input:
    fluent_id: str


@dataclass(frozen=True)
class Dist:
    """Distance from the point read off two coordinate fluents to a target."""

    x_id: str
    y_id: str
    target: Point


@dataclass(frozen=True)
class Cmp:
    op: str  # 'lt' | 'le' | 'gt' | 'ge'
    operand: "Gate"
    threshold: float


@dataclass(frozen=True)
class Eq:
    """Symbolic equality on a fluent's value; used by plan guards."""

    fluent_id: str
    value: object


@dataclass(frozen=True)
class And:
    items: tuple["Gate", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["Gate", ...]


@dataclass(frozen=True)
class Not:
    item: "Gate"


Gate = Union[Const, Input, Dist, Cmp, Eq, And, Or, Not]
FluentNetwork = Gate

_OPS = {"lt": lambda a, b: a < b, "le": lambda a, b: a <= b,
        "gt": lambda a, b: a > b, "ge": lambda a, b: a >= b}
_OP_SYMBOLS = {"<": "lt", "<=": "le", ">": "gt", ">=": "ge"}
_SYMBOL_OPS = {v: k for k, v in _OP_SYMBOLS.items()}


@dataclass(frozen=True)
class ChangesModel:
    """Which processes change which state variables.

    Entries are (process-kind, state-var) pairs, e.g.
    ('low-level-navigation-plan', 'x').
    """

    entries: frozenset[tuple[str, str]] = field(default_factory=frozenset)

    def changed_vars(self, process_kind: str) -> set[str]:
        return {var for kind, var in self.entries if kind == process_kind}


def eval_network(net: Gate, bindings: Mapping[str, object]):
    """Evaluate a network against fluent bindings. Raises UnboundInput."""
    if isinstance(net, Const):
        return net.value
    if isinstance(net, Input):
        try:
            return bindings[net.fluent_id]
        except KeyError:
            raise UnboundInput(net.fluent_id) from None
    if isinstance(net, Dist):
        try:
            x, y = bindings[net.x_id], bindings[net.y_id]
        except KeyError as missing:
            raise UnboundInput(missing.args[0]) from None
        return math.hypot(x - net.target.x, y - net.target.y)
    if isinstance(net, Cmp):
        return _OPS[net.op](eval_network(net.operand, bindings), net.threshold)
    if isinstance(net, Eq):
        try:
            return bindings[net.fluent_id] == net.value
        except KeyError:
            raise UnboundInput(net.fluent_id) from None
    if isinstance(net, And):
        return all(bool(eval_network(g, bindings)) for g in net.items)
    if isinstance(net, Or):
        return any(bool(eval_network(g, bindings)) for g in net.items)
    if isinstance(net, Not):
        return not eval_network(net.item, bindings)
    raise TypeError(f"not a gate: {net!r}")


def network_inputs(net: Gate) -> set[str]:
    """All fluent ids a network reads."""
    out: set[str] = set()
    _collect_inputs(net, out)
    return out


def _collect_inputs(net: Gate, out: set[str]) -> None:
    if isinstance(net, Input):
        out.add(net.fluent_id)
    elif isinstance(net, Dist):
        out.update((net.x_id, net.y_id))
    elif isinstance(net, Eq):
        out.add(net.fluent_id)
    elif isinstance(net, Cmp):
        _collect_inputs(net.operand, out)
    elif isinstance(net, Not):
        _collect_inputs(net.item, out)
    elif isinstance(net, (And, Or)):
        for g in net.items:
            _collect_inputs(g, out)


def flatten(net: Gate, definitions: Mapping[str, Gate]) -> Gate:
    """Inline locally defined fluents so only primitive inputs remain."""
    if isinstance(net, Input) and net.fluent_id in definitions:
        return flatten(definitions[net.fluent_id], definitions)
    if isinstance(net, Cmp):
        return Cmp(net.op, flatten(net.operand, definitions), net.threshold)
    if isinstance(net, Not):
        return Not(flatten(net.item, definitions))
    if isinstance(net, And):
        return And(tuple(flatten(g, definitions) for g in net.items))
    if isinstance(net, Or):
        return Or(tuple(flatten(g, definitions) for g in net.items))
    return net


def compile_to_region(net: Gate, x_id: str = "robot-x", y_id: str = "robot-y") -> Region:
    """Compile a position-only network to an equivalent region.

    Comparison of a coordinate fluent against a constant becomes a strict
    half-plane (non-strict ops become complements of the opposite strict
    one); a compared Dist gate becomes a disk or its complement; And/Or/Not
    become Intersection/Union/Complement.  Anything else raises
    NotCompilable naming the offending gate.
    """
    if isinstance(net, And):
        return geom2d.Intersection(tuple(compile_to_region(g, x_id, y_id) for g in net.items))
    if isinstance(net, Or):
        return geom2d.Union(tuple(compile_to_region(g, x_id, y_id) for g in net.items))
    if isinstance(net, Not):
        return geom2d.Complement(compile_to_region(net.item, x_id, y_id))
    if isinstance(net, Cmp):
        return _compile_cmp(net, x_id, y_id)
    raise NotCompilable(net)


def _compile_cmp(net: Cmp, x_id: str, y_id: str) -> Region:
    if isinstance(net.operand, Dist):
        d = net.operand
        if {d.x_id, d.y_id} != {x_id, y_id}:
            raise NotCompilable(net)
        disk = geom2d.Disk(d.target, net.threshold)
        if net.op in ("lt", "le"):
            return disk
        return geom2d.Complement(disk)
    if isinstance(net.operand, Input):
        fid = net.operand.fluent_id
        if fid == x_id:
            axis = "x"
        elif fid == y_id:
            axis = "y"
        else:
            raise NotCompilable(net)
        if net.op == "lt":
            return geom2d.HalfPlane(axis, net.threshold, "below")
        if net.op == "gt":
            return geom2d.HalfPlane(axis, net.threshold, "above")
        if net.op == "le":
            return geom2d.Complement(geom2d.HalfPlane(axis, net.threshold, "above"))
        return geom2d.Complement(geom2d.HalfPlane(axis, net.threshold, "below"))
    raise NotCompilable(net)


def pending_networks(interp_state, changes: ChangesModel, process_kind: str) -> list[Gate]:
    """Pending networks that a process of the given kind could retrigger.

    A network qualifies when its thread is blocked on it and it reads,
    transitively through the interpreter's local definitions, a fluent
    measuring a state variable the process changes.
    """
    touched = changes.changed_vars(process_kind)
    if not touched:
        return []
    measured = interp_state.measured_fluents
    out = []
    for net in interp_state.pending_conditions():
        vars_read = {measured[f] for f in network_inputs(net) if f in measured}
        if vars_read & touched:
            out.append(net)
    return out


# --- textual form -----------------------------------------------------------
#
# (fluent NAME) | (dist FX FY TX TY) | (< E C) (<= E C) (> E C) (>= E C)
# (= (fluent NAME) VALUE) | (and ...) (or ...) (not E) | true | false

def _fluent_name(node: SNode) -> str | None:
    """Accept either a bare name or a (fluent NAME) form."""
    if not node.is_list and isinstance(node.value, str):
        return node.value
    if node.is_list and node.head() == "fluent" and len(node.value) == 2 \
            and isinstance(node.value[1].value, str):
        return node.value[1].value
    return None


def network_from_snode(node: SNode) -> Gate:
    if not node.is_list:
        if isinstance(node.value, bool):
            return Const(node.value)
        if isinstance(node.value, (int, float)):
            return Const(float(node.value))
        if isinstance(node.value, str):
            return Input(node.value)  # bare fluent name, like dist operands
        raise SexprError(f"expected a network, got atom {node.value!r}", node.line, node.col)
    head = node.head()
    items = node.value
    if head == "fluent" and len(items) == 2 and isinstance(items[1].value, str):
        return Input(items[1].value)
    if head == "dist" and len(items) == 5:
        fx, fy = _fluent_name(items[1]), _fluent_name(items[2])
        tx, ty = items[3].value, items[4].value
        if fx is not None and fy is not None \
                and isinstance(tx, (int, float)) and isinstance(ty, (int, float)):
            return Dist(fx, fy, Point(float(tx), float(ty)))
    if head in _OP_SYMBOLS and len(items) == 3:
        operand = network_from_snode(items[1])
        thr = items[2].value
        if not isinstance(thr, (int, float)) or isinstance(thr, bool):
            raise SexprError("comparison threshold must be a number", items[2].line, items[2].col)
        return Cmp(_OP_SYMBOLS[head], operand, float(thr))
    if head == "=" and len(items) == 3:
        operand = network_from_snode(items[1])
        if not isinstance(operand, Input):
            raise SexprError("equality tests a fluent", items[1].line, items[1].col)
        return Eq(operand.fluent_id, items[2].value)
    if head == "and":
        return And(tuple(network_from_snode(c) for c in items[1:]))
    if head == "or":
        return Or(tuple(network_from_snode(c) for c in items[1:]))
    if head == "not" and len(items) == 2:
        return Not(network_from_snode(items[1]))
    raise SexprError(f"malformed network form {head!r}", node.line, node.col)


def network_to_sexpr(net: Gate):
    """Network -> plain s-expression structure (for the plan printer)."""
    if isinstance(net, Const):
        return bool(net.value) if isinstance(net.value, bool) else net.value
    if isinstance(net, Input):
        return ("fluent", net.fluent_id)
    if isinstance(net, Dist):
        return ("dist", net.x_id, net.y_id, _num(net.target.x), _num(net.target.y))
    if isinstance(net, Cmp):
        return (_SYMBOL_OPS[net.op], network_to_sexpr(net.operand), _num(net.threshold))
    if isinstance(net, Eq):
        return ("=", ("fluent", net.fluent_id), net.value)
    if isinstance(net, And):
        return ("and",) + tuple(network_to_sexpr(g) for g in net.items)
    if isinstance(net, Or):
        return ("or",) + tuple(network_to_sexpr(g) for g in net.items)
    if isinstance(net, Not):
        return ("not", network_to_sexpr(net.item))
    raise TypeError(f"not a gate: {net!r}")


def _num(v: float):
    return int(v) if float(v).is_integer() else float(v)
