"""Plan AST for the concurrent reactive plan subset.

Construct bodies that allow several statements are normalized to a Seq
at parse time, so structural equality is stable under print/parse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..fluents import Gate
from ..geom2d import Point, Polyline


# -- primitive actions --------------------------------------------------------

@dataclass(frozen=True)
class MoveTo:
    target: Point


@dataclass(frozen=True)
class SetNavigationMode:
    mode: str  # 'office' | 'hallway' | 'doorway'


@dataclass(frozen=True)
class GoTo:
    location: str


@dataclass(frozen=True)
class LowLevelNavPlan:
    """Drive a pre-planned path; dest may be a location id instead."""

    plan_id: str
    path: Polyline | None = None
    dest: str | None = None


@dataclass(frozen=True)
class PickUp:
    obj: str


@dataclass(frozen=True)
class PutDown:
    obj: str


@dataclass(frozen=True)
class EstimateDoorAngle:
    pass


@dataclass(frozen=True)
class LookFor:
    description: tuple
    camera: str = "camera"


Action = Union[MoveTo, SetNavigationMode, GoTo, LowLevelNavPlan,
               PickUp, PutDown, EstimateDoorAngle, LookFor]


# -- composite plan forms -----------------------------------------------------

@dataclass(frozen=True)
class Seq:
    items: tuple["Plan", ...]


@dataclass(frozen=True)
class Par:
    """Run all branches; done when every branch is done."""

    items: tuple["Plan", ...]


@dataclass(frozen=True)
class TryInParallel:
    """Run all branches; done when the first finishes, the rest are killed."""

    items: tuple["Plan", ...]


@dataclass(frozen=True)
class Loop:
    """Repeat body; the until condition is checked after each iteration."""

    body: "Plan"
    until: Gate | None = None


@dataclass(frozen=True)
class WaitFor:
    condition: Gate


@dataclass(frozen=True)
class Whenever:
    """Run body once per rising edge of the condition; a still-running
    body suppresses new instances."""

    condition: Gate
    body: "Plan"


@dataclass(frozen=True)
class WithPolicy:
    """Run policy alongside body; the policy is killed when body finishes."""

    policy: "Plan"
    body: "Plan"


@dataclass(frozen=True)
class WithValve:
    valve: str
    body: "Plan"
    priority: int = 1


@dataclass(frozen=True)
class WithLocalFluents:
    """Lexically scoped fluent definitions (name, network)."""

    defs: tuple[tuple[str, Gate], ...]
    body: "Plan"


@dataclass(frozen=True)
class Named:
    name: str
    body: "Plan"


@dataclass(frozen=True)
class If:
    guard: Gate
    then: "Plan"


@dataclass(frozen=True)
class SetVar:
    name: str
    value: object


@dataclass(frozen=True)
class Primitive:
    action: Action


Plan = Union[Seq, Par, TryInParallel, Loop, WaitFor, Whenever, WithPolicy,
             WithValve, WithLocalFluents, Named, If, SetVar, Primitive]


def seq_of(items) -> Plan:
    """One statement stays bare; several become a Seq."""
    items = tuple(items)
    if not items:
        raise ValueError("empty body")
    return items[0] if len(items) == 1 else Seq(items)
