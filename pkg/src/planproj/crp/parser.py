"""Parser for the textual plan language.

Grammar (s-expressions; NET is a fluent network, see fluents):

    (seq P...)  (par P...)  (try-in-parallel P...)
    (loop P... :until NET)            until optional
    (wait-for NET)
    (whenever NET P...)
    (with-policy (P) P...)            first form is the policy
    (with-valve VALVE [:priority N] P...)
    (with-local-fluents ((NAME NET)...) P...)
    (named NAME P...)
    (if NET P...)
    (set NAME VALUE)
    (move-to X Y)  (set-navigation-mode MODE)  (go-to LOC)
    (low-level-nav-plan DEST ID)      DEST = location | (path (x y)...)
    (pick-up OBJ)  (put-down OBJ)  (estimate-door-angle)
    (look-for (DESC...) CAMERA)
"""

from __future__ import annotations

from .. import fluents
from ..geom2d import Point, Polyline
from ..sexpr import SexprError, SNode, parse_one
from . import nodes
from .nodes import Plan


class PlanSyntaxError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0, expected: str | None = None):
        detail = f"{message} (line {line}, column {col})"
        if expected:
            detail += f"; expected {expected}"
        super().__init__(detail)
        self.line = line
        self.col = col
        self.expected = expected


_NAV_MODES = ("office", "hallway", "doorway")


def parse_plan(text: str) -> Plan:
    """Parse one plan from source text."""
    try:
        return _plan(parse_one(text))
    except SexprError as err:
        raise PlanSyntaxError(str(err), err.line, err.col) from None


def plan_from_snode(node: SNode) -> Plan:
    try:
        return _plan(node)
    except SexprError as err:
        raise PlanSyntaxError(str(err), err.line, err.col) from None


def _plan(node: SNode) -> Plan:
    if not node.is_list or not node.value:
        raise PlanSyntaxError("expected a plan form", node.line, node.col, "a (head ...) list")
    head = node.head()
    items = node.value
    rest = items[1:]
    if head == "seq":
        return nodes.Seq(_body_tuple(rest, node))
    if head == "par":
        return nodes.Par(_body_tuple(rest, node))
    if head == "try-in-parallel":
        return nodes.TryInParallel(_body_tuple(rest, node))
    if head == "loop":
        body, until = _split_until(rest)
        return nodes.Loop(nodes.seq_of(_body_tuple(body, node)), until)
    if head == "wait-for":
        _arity(node, 1)
        return nodes.WaitFor(fluents.network_from_snode(rest[0]))
    if head == "whenever":
        if len(rest) < 2:
            raise PlanSyntaxError("whenever takes a condition and a body", node.line, node.col)
        return nodes.Whenever(fluents.network_from_snode(rest[0]),
                              nodes.seq_of(_body_tuple(rest[1:], node)))
    if head == "with-policy":
        if len(rest) < 2:
            raise PlanSyntaxError("with-policy takes a policy and a body", node.line, node.col)
        return nodes.WithPolicy(_plan(rest[0]), nodes.seq_of(_body_tuple(rest[1:], node)))
    if head == "with-valve":
        return _with_valve(node, rest)
    if head == "with-local-fluents":
        return _with_local_fluents(node, rest)
    if head == "named":
        if len(rest) < 2 or not isinstance(rest[0].value, str):
            raise PlanSyntaxError("named takes a name and a body", node.line, node.col)
        return nodes.Named(rest[0].value, nodes.seq_of(_body_tuple(rest[1:], node)))
    if head == "if":
        if len(rest) < 2:
            raise PlanSyntaxError("if takes a guard and a body", node.line, node.col)
        return nodes.If(fluents.network_from_snode(rest[0]),
                        nodes.seq_of(_body_tuple(rest[1:], node)))
    if head == "set":
        _arity(node, 2)
        if not isinstance(rest[0].value, str):
            raise PlanSyntaxError("set takes a fluent name", rest[0].line, rest[0].col)
        return nodes.SetVar(rest[0].value, rest[1].value)
    action = _action(head, node, rest)
    if action is not None:
        return nodes.Primitive(action)
    raise PlanSyntaxError(f"unknown plan head {head!r}", node.line, node.col,
                          "seq/par/try-in-parallel/loop/wait-for/whenever/with-policy/"
                          "with-valve/with-local-fluents/named/if/set or a primitive")


def _action(head: str, node: SNode, rest) -> nodes.Action | None:
    if head == "move-to":
        _arity(node, 2)
        return nodes.MoveTo(Point(_num(rest[0]), _num(rest[1])))
    if head == "set-navigation-mode":
        _arity(node, 1)
        mode = rest[0].value
        if mode not in _NAV_MODES:
            raise PlanSyntaxError(f"unknown travel mode {mode!r}", rest[0].line, rest[0].col,
                                  "|".join(_NAV_MODES))
        return nodes.SetNavigationMode(mode)
    if head == "go-to":
        _arity(node, 1)
        return nodes.GoTo(str(rest[0].value))
    if head == "low-level-nav-plan":
        _arity(node, 2)
        dest, plan_id = rest[0], str(rest[1].value)
        if dest.is_list and dest.head() == "path":
            pts = []
            for p in dest.value[1:]:
                if not p.is_list or len(p.value) != 2:
                    raise PlanSyntaxError("path vertex takes (x y)", p.line, p.col)
                pts.append(Point(_num(p.value[0]), _num(p.value[1])))
            return nodes.LowLevelNavPlan(plan_id, path=Polyline(tuple(pts)))
        return nodes.LowLevelNavPlan(plan_id, dest=str(dest.value))
    if head == "pick-up":
        _arity(node, 1)
        return nodes.PickUp(str(rest[0].value))
    if head == "put-down":
        _arity(node, 1)
        return nodes.PutDown(str(rest[0].value))
    if head == "estimate-door-angle":
        _arity(node, 0)
        return nodes.EstimateDoorAngle()
    if head == "look-for":
        _arity(node, 2)
        if not rest[0].is_list:
            raise PlanSyntaxError("look-for description must be a list", rest[0].line, rest[0].col)
        from ..sexpr import strip
        return nodes.LookFor(strip(rest[0]), str(rest[1].value))
    return None


def _with_valve(node: SNode, rest) -> Plan:
    if not rest or not isinstance(rest[0].value, str):
        raise PlanSyntaxError("with-valve takes a valve name", node.line, node.col)
    valve = rest[0].value
    body = list(rest[1:])
    priority = 1
    if len(body) >= 2 and body[0].value == ":priority":
        if not isinstance(body[1].value, int):
            raise PlanSyntaxError(":priority takes an integer", body[1].line, body[1].col)
        priority = body[1].value
        body = body[2:]
    return nodes.WithValve(valve, nodes.seq_of(_body_tuple(body, node)), priority)


def _with_local_fluents(node: SNode, rest) -> Plan:
    if not rest or not rest[0].is_list:
        raise PlanSyntaxError("with-local-fluents takes a definitions list", node.line, node.col)
    defs = []
    for d in rest[0].value:
        if not d.is_list or len(d.value) != 2 or not isinstance(d.value[0].value, str):
            raise PlanSyntaxError("definition takes (name network)", d.line, d.col)
        defs.append((d.value[0].value, fluents.network_from_snode(d.value[1])))
    return nodes.WithLocalFluents(tuple(defs), nodes.seq_of(_body_tuple(rest[1:], node)))


def _split_until(rest):
    body = list(rest)
    until = None
    if len(body) >= 2 and body[-2].value == ":until":
        until = fluents.network_from_snode(body[-1])
        body = body[:-2]
    return body, until


def _body_tuple(body, node) -> tuple[Plan, ...]:
    if not body:
        raise PlanSyntaxError(f"{node.head()} needs a nonempty body", node.line, node.col)
    return tuple(_plan(b) for b in body)


def _arity(node: SNode, n: int) -> None:
    if len(node.value) != n + 1:
        raise PlanSyntaxError(f"{node.head()} takes {n} argument(s)", node.line, node.col)


def _num(node: SNode) -> float:
    if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
        raise PlanSyntaxError("expected a number", node.line, node.col)
    return float(node.value)
