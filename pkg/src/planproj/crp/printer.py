"""Canonical textual form for plans; parse(print_plan(p)) == p."""

from __future__ import annotations

from .. import fluents, sexpr
from . import nodes
from .nodes import Plan


def print_plan(plan: Plan) -> str:
    return sexpr.render(plan_to_sexpr(plan)) + "\n"


def plan_to_sexpr(plan: Plan):
    n, f = nodes, fluents.network_to_sexpr
    if isinstance(plan, n.Seq):
        return ("seq",) + tuple(plan_to_sexpr(p) for p in plan.items)
    if isinstance(plan, n.Par):
        return ("par",) + tuple(plan_to_sexpr(p) for p in plan.items)
    if isinstance(plan, n.TryInParallel):
        return ("try-in-parallel",) + tuple(plan_to_sexpr(p) for p in plan.items)
    if isinstance(plan, n.Loop):
        form = ("loop", plan_to_sexpr(plan.body))
        return form + ((":until", f(plan.until)) if plan.until is not None else ())
    if isinstance(plan, n.WaitFor):
        return ("wait-for", f(plan.condition))
    if isinstance(plan, n.Whenever):
        return ("whenever", f(plan.condition), plan_to_sexpr(plan.body))
    if isinstance(plan, n.WithPolicy):
        return ("with-policy", plan_to_sexpr(plan.policy), plan_to_sexpr(plan.body))
    if isinstance(plan, n.WithValve):
        return ("with-valve", plan.valve, ":priority", plan.priority, plan_to_sexpr(plan.body))
    if isinstance(plan, n.WithLocalFluents):
        defs = tuple((name, f(net)) for name, net in plan.defs)
        return ("with-local-fluents", defs, plan_to_sexpr(plan.body))
    if isinstance(plan, n.Named):
        return ("named", plan.name, plan_to_sexpr(plan.body))
    if isinstance(plan, n.If):
        return ("if", f(plan.guard), plan_to_sexpr(plan.then))
    if isinstance(plan, n.SetVar):
        return ("set", plan.name, plan.value)
    if isinstance(plan, n.Primitive):
        return _action_to_sexpr(plan.action)
    raise TypeError(f"not a plan node: {plan!r}")


def _action_to_sexpr(a):
    n = nodes
    if isinstance(a, n.MoveTo):
        return ("move-to", _c(a.target.x), _c(a.target.y))
    if isinstance(a, n.SetNavigationMode):
        return ("set-navigation-mode", a.mode)
    if isinstance(a, n.GoTo):
        return ("go-to", a.location)
    if isinstance(a, n.LowLevelNavPlan):
        if a.path is not None:
            dest = ("path",) + tuple((_c(p.x), _c(p.y)) for p in a.path.vertices)
        else:
            dest = a.dest
        return ("low-level-nav-plan", dest, a.plan_id)
    if isinstance(a, n.PickUp):
        return ("pick-up", a.obj)
    if isinstance(a, n.PutDown):
        return ("put-down", a.obj)
    if isinstance(a, n.EstimateDoorAngle):
        return ("estimate-door-angle",)
    if isinstance(a, n.LookFor):
        return ("look-for", a.description, a.camera)
    raise TypeError(f"not an action: {a!r}")


def _c(v: float):
    return int(v) if float(v).is_integer() else float(v)
