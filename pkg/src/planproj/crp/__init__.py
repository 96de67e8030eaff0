"""Concurrent reactive plans: syntax tree, reader, printer, interpreter."""

from .interpreter import (
    DeadlockDetected,
    Event,
    FluentChange,
    Interpreter,
    PendingCondition,
    PrimitiveDone,
    PrimitiveRequest,
    Wakeup,
    step_interpreter,
)
from .nodes import (
    Action,
    EstimateDoorAngle,
    GoTo,
    If,
    Loop,
    LookFor,
    LowLevelNavPlan,
    MoveTo,
    Named,
    Par,
    PickUp,
    Plan,
    Primitive,
    PutDown,
    Seq,
    SetNavigationMode,
    SetVar,
    TryInParallel,
    WaitFor,
    Whenever,
    WithLocalFluents,
    WithPolicy,
    WithValve,
    seq_of,
)
from .parser import PlanSyntaxError, parse_plan, plan_from_snode
from .printer import plan_to_sexpr, print_plan

__all__ = [
    "Action", "DeadlockDetected", "EstimateDoorAngle", "Event",
    "FluentChange", "GoTo", "If", "Interpreter", "Loop", "LookFor",
    "LowLevelNavPlan", "MoveTo", "Named", "Par", "PendingCondition",
    "PickUp", "Plan", "PlanSyntaxError", "Primitive", "PrimitiveDone",
    "PrimitiveRequest", "PutDown", "Seq", "SetNavigationMode", "SetVar",
    "TryInParallel", "WaitFor", "Wakeup", "Whenever", "WithLocalFluents",
    "WithPolicy", "WithValve", "parse_plan", "plan_from_snode",
    "plan_to_sexpr", "print_plan", "seq_of", "step_interpreter",
]
