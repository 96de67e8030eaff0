"""The causal rule language: effect rules, exogenous-event rules, and
projection rules, plus the calibrated random-number scheme.

Effect rules (e->p): when an event matching the trigger occurs and the
condition holds just before it, each ground instance applies its effects
atomically with the rule's probability.  Effects assert, clip, or persist
propositions (persist opens an occasion that expires after a duration
unless clipped earlier).

Exogenous rules (p->e): while the condition holds, the event occurs as a
Poisson process with the given average spacing.

Projection rules: when a primitive of a matching kind starts and the
condition holds, a list of delayed events is scheduled.

Rule files are s-expressions mirroring the plan language; see load_rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import sexpr, terms
from .sexpr import SexprError, SNode
from .terms import Term
from .timeline import Timeline

TRIGGER_SPACING_MAX = 0.001  # spacings at or below this are "fire at onset" idioms


class ContradictoryEffects(Exception):
    pass


CondItem = tuple  # ('pos', pattern) | ('thnot', pattern)


@dataclass(frozen=True)
class Effect:
    kind: str  # 'assert' | 'clip' | 'persist'
    prop: Term
    duration: float | None = None  # persist only


@dataclass(frozen=True)
class EffectRule:
    name: str
    event: Term
    condition: tuple[CondItem, ...] = ()
    probability: float = 1.0
    effects: tuple[Effect, ...] = ()

    def __post_init__(self):
        asserts = {e.prop for e in self.effects if e.kind in ("assert", "persist")}
        clips = {e.prop for e in self.effects if e.kind == "clip"}
        both = asserts & clips
        if both:
            raise ContradictoryEffects(
                f"rule {self.name!r} asserts and clips {terms.render(next(iter(both)))}")


@dataclass(frozen=True)
class ExoRule:
    name: str
    condition: tuple[CondItem, ...]
    spacing: float  # average seconds between occurrences while enabled
    event: Term

    @property
    def is_trigger(self) -> bool:
        """True for the fire-as-soon-as-enabled idiom (tiny spacing)."""
        return self.spacing <= TRIGGER_SPACING_MAX


@dataclass(frozen=True)
class ProjectRule:
    name: str
    head: Term
    condition: tuple[CondItem, ...] = ()
    events: tuple[tuple[float, Term], ...] = ()  # (delay, event pattern)


@dataclass(frozen=True)
class FlawPredicate:
    """A flaw as a timeline query, not a code callback."""

    name: str
    exists_occurrence: Term | None = None
    exists_occasion: Term | None = None

    def holds(self, tl: Timeline) -> bool:
        if self.exists_occurrence is not None:
            if any(terms.match(self.exists_occurrence, o.event) is not None
                   for o in tl.occurrences):
                return True
        if self.exists_occasion is not None:
            if any(terms.match(self.exists_occasion, prop) is not None
                   for prop in tl.occasions):
                return True
        return False


@dataclass
class RuleSet:
    effect_rules: list[EffectRule] = field(default_factory=list)
    exo_rules: list[ExoRule] = field(default_factory=list)
    project_rules: list[ProjectRule] = field(default_factory=list)
    flaws: dict[str, FlawPredicate] = field(default_factory=dict)

    def merged_with(self, other: "RuleSet") -> "RuleSet":
        return RuleSet(self.effect_rules + other.effect_rules,
                       self.exo_rules + other.exo_rules,
                       self.project_rules + other.project_rules,
                       {**self.flaws, **other.flaws})


# --- condition solving -------------------------------------------------------

def solve_condition(cond: Sequence[CondItem], tl: Timeline, t: float,
                    bindings: dict | None = None, side: str = "before") -> list[dict]:
    """All variable bindings under which the conjunction holds at t.

    Positive items match against holding occasions; thnot items succeed
    when no holding occasion matches (negation as failure).
    """
    return solve_condition_over(cond, tl.holding(t, side), bindings)


def solve_condition_over(cond: Sequence[CondItem], holding: Sequence[Term],
                         bindings: dict | None = None) -> list[dict]:
    """solve_condition against an explicit set of holding propositions.

    Used when the caller has frozen the world over a window and the
    timeline itself must not be consulted.
    """
    solutions = [dict(bindings) if bindings else {}]
    for item in cond:
        sign, pattern = item
        if sign == "pos":
            nxt = []
            for b in solutions:
                for prop in holding:
                    extended = terms.match(terms.substitute(pattern, b), prop, b)
                    if extended is not None:
                        nxt.append(extended)
            solutions = nxt
        else:  # thnot
            nxt = []
            for b in solutions:
                p = terms.substitute(pattern, b)
                if not any(terms.match(p, prop) is not None for prop in holding):
                    nxt.append(b)
            solutions = nxt
        if not solutions:
            break
    return solutions


# --- effect application ------------------------------------------------------

@dataclass
class AppliedRule:
    rule: str
    bindings: dict
    opened: list[Term]
    closed: list[Term]


def apply_effect_rules(tl: Timeline, event: Term, date: float,
                       rules: Sequence[EffectRule], rng) -> list[AppliedRule]:
    """Apply every matching ground effect-rule instance to the timeline.

    Per instance: if the full effect set is already in force the instance
    is skipped as a no-op (no randomness consumed); otherwise it applies
    with the rule's probability, clips first, then asserts/persists, all
    dated at ``date``.
    """
    # Phase 1: solve every rule instance against the pre-event state, so one
    # rule's effects cannot enable or disable another rule at the same event.
    chosen: list[tuple[EffectRule, dict, list[Effect]]] = []
    for rule in rules:
        b0 = terms.match(rule.event, event)
        if b0 is None:
            continue
        for b in solve_condition(rule.condition, tl, date, b0):
            effects = [Effect(e.kind, terms.substitute(e.prop, b), e.duration)
                       for e in rule.effects]
            if any(not terms.is_ground(e.prop) for e in effects):
                raise ValueError(f"rule {rule.name!r} leaves effect variables unbound")
            if _is_noop(tl, effects, date):
                continue
            if rule.probability < 1.0 and rng.random() >= rule.probability:
                continue
            chosen.append((rule, b, effects))
    # Phase 2: apply atomically at the event date, clips before asserts.
    applied: list[AppliedRule] = []
    for rule, b, effects in chosen:
        opened: list[Term] = []
        closed: list[Term] = []
        for e in effects:
            if e.kind == "clip" and tl.clip_prop(e.prop, date):
                closed.append(e.prop)
        for e in effects:
            if e.kind == "assert" and tl.assert_prop(e.prop, date):
                opened.append(e.prop)
            elif e.kind == "persist":
                if tl.assert_prop(e.prop, date, expiry=date + (e.duration or 0.0)):
                    opened.append(e.prop)
        applied.append(AppliedRule(rule.name, b, opened, closed))
    return applied


def _is_noop(tl: Timeline, effects: Sequence[Effect], date: float) -> bool:
    for e in effects:
        if e.kind == "clip" and tl.holds_at(e.prop, date, "before"):
            return False
        if e.kind in ("assert", "persist") and not tl.holds_at(e.prop, date, "after"):
            return False
    return True


# --- exogenous sampling ------------------------------------------------------

def sample_exogenous_occurrences(tl: Timeline, rules: Sequence[ExoRule],
                                 window: tuple[float, float], rng,
                                 cond_eval: Callable[[ExoRule], bool] | None = None,
                                 max_events: int = 10 ** 6) -> list[tuple[float, Term]]:
    """Sample Poisson occurrences of enabled rules over (t1, t2].

    Conditions are treated as constant over the window (the caller must
    pick windows between events).  Arrival times come from exponential
    gaps, so counts are Poisson with mean (t2-t1)/spacing and times are
    uniform given the count.  Returned sorted by date.
    """
    t1, t2 = window
    if t2 < t1:
        raise ValueError(f"bad window ({t1}, {t2})")
    out: list[tuple[float, Term]] = []
    for rule in rules:
        if cond_eval is not None:
            enabled = [{}] if cond_eval(rule) else []
        else:
            enabled = solve_condition(rule.condition, tl, t1, side="after")
        seen: set[Term] = set()
        for b in enabled:
            ev = terms.substitute(rule.event, b)
            if not terms.is_ground(ev) or ev in seen:
                continue
            seen.add(ev)
            t = t1
            while True:
                t += rng.expovariate(1.0 / rule.spacing)
                if t > t2:
                    break
                out.append((t, ev))
                if len(out) > max_events:
                    raise RuntimeError("exogenous sampling exceeded max_events")
    out.sort(key=lambda pair: pair[0])
    return out


# --- calibrated random numbers ----------------------------------------------

def random_number(tl, max_value: int, rng) -> int:
    """Uniform integer on [1, max_value] from independent fair bits.

    max_value must be a power of two: the draw is 1 + sum(bit_i * 2^i).
    This is the direct path; random_number_via_rules obtains the same
    distribution through randomize bit-flip rules recorded on a timeline
    (tl is accepted here for signature symmetry and may be None).
    """
    n_bits = _bit_count(max_value)
    n = 0
    for i in range(n_bits):
        n |= rng.getrandbits(1) << i
    return 1 + n


def randomize_rules(max_value: int) -> list[EffectRule]:
    """Effect rules that re-randomize the bit occasions on a randomize event.

    Each bit flips with probability 0.5, so its post-event value is fair
    regardless of the prior state.
    """
    n_bits = _bit_count(max_value)
    out = []
    for i in range(n_bits):
        for frm, to in ((0, 1), (1, 0)):
            out.append(EffectRule(
                name=f"randomize-bit-{i}-{frm}to{to}",
                event="randomize",
                condition=(("pos", ("random-bit", i, frm)),),
                probability=0.5,
                effects=(Effect("clip", ("random-bit", i, frm)),
                         Effect("assert", ("random-bit", i, to))),
            ))
    return out


def random_number_via_rules(tl: Timeline, max_value: int, rng, date: float) -> int:
    """The rule-based path: emit a randomize event, apply the bit-flip
    rules, then read the bit occasions back into an integer."""
    n_bits = _bit_count(max_value)
    for i in range(n_bits):
        if not (tl.holds_at(("random-bit", i, 0), date, "before")
                or tl.holds_at(("random-bit", i, 1), date, "before")):
            tl.assert_prop(("random-bit", i, 0), date - 1.0)
    tl.add_occurrence(date, "randomize", event_class=2)
    apply_effect_rules(tl, "randomize", date, randomize_rules(max_value), rng)
    n = 0
    for i in range(n_bits):
        if tl.holds_at(("random-bit", i, 1), date, "after"):
            n |= 1 << i
    return 1 + n


def _bit_count(max_value: int) -> int:
    if max_value < 1 or max_value & (max_value - 1):
        raise ValueError(f"max_value must be a positive power of two, got {max_value}")
    return max_value.bit_length() - 1


# --- loading ------------------------------------------------------------------

def load_rules(text: str) -> RuleSet:
    """Parse a rules file (see module doc for the grammar)."""
    rs = RuleSet()
    for form in sexpr.parse(text):
        if form.head() == "rules":
            for sub in form.value[1:]:
                _load_rule(sub, rs)
        else:
            _load_rule(form, rs)
    return rs


def _load_rule(node: SNode, rs: RuleSet) -> None:
    head = node.head()
    if head is None:
        raise SexprError("expected a rule form", node.line, node.col)
    items = node.value
    if len(items) < 2 or not isinstance(items[1].value, str):
        raise SexprError(f"{head} rule needs a name", node.line, node.col)
    name = items[1].value
    kw = _keywords(items[2:])
    if head == "e->p":
        rs.effect_rules.append(EffectRule(
            name=name,
            event=_term(_require(kw, ":event", node)),
            condition=_cond(kw.get(":if")),
            probability=float(_scalar(kw.get(":prob"), 1.0)),
            effects=_effects(_require(kw, ":causes", node)),
        ))
    elif head == "p->e":
        rs.exo_rules.append(ExoRule(
            name=name,
            condition=_cond(kw.get(":while")),
            spacing=float(_scalar(_require(kw, ":spacing", node), None)),
            event=_term(_require(kw, ":occurs", node)),
        ))
    elif head == "project":
        events = []
        for pair in _require(kw, ":events", node).value:
            if not pair.is_list or len(pair.value) != 2:
                raise SexprError("projected event takes (delay event)", pair.line, pair.col)
            events.append((float(pair.value[0].value), _term(pair.value[1])))
        rs.project_rules.append(ProjectRule(
            name=name,
            head=_term(_require(kw, ":head", node)),
            condition=_cond(kw.get(":if")),
            events=tuple(events),
        ))
    elif head == "flaw":
        rs.flaws[name] = FlawPredicate(
            name=name,
            exists_occurrence=_term(kw[":exists-occurrence"]) if ":exists-occurrence" in kw else None,
            exists_occasion=_term(kw[":exists-occasion"]) if ":exists-occasion" in kw else None,
        )
    else:
        raise SexprError(f"unknown rule kind {head!r}", node.line, node.col)


def _keywords(nodes: Sequence[SNode]) -> dict[str, SNode]:
    kw: dict[str, SNode] = {}
    i = 0
    while i < len(nodes):
        key = nodes[i].value
        if not (isinstance(key, str) and key.startswith(":")) or i + 1 >= len(nodes):
            raise SexprError("expected :keyword value pairs", nodes[i].line, nodes[i].col)
        kw[key] = nodes[i + 1]
        i += 2
    return kw


def _require(kw: dict[str, SNode], key: str, node: SNode) -> SNode:
    if key not in kw:
        raise SexprError(f"missing {key}", node.line, node.col)
    return kw[key]


def _scalar(node: SNode | None, default):
    if node is None:
        return default
    return node.value


def _term(node: SNode) -> Term:
    return terms.term_from_sexpr(sexpr.strip(node))


def _cond(node: SNode | None) -> tuple[CondItem, ...]:
    if node is None:
        return ()
    if not node.is_list:
        raise SexprError("condition must be a list of patterns", node.line, node.col)
    out = []
    for item in node.value:
        if item.head() == "thnot":
            if len(item.value) != 2:
                raise SexprError("thnot takes one pattern", item.line, item.col)
            out.append(("thnot", _term(item.value[1])))
        else:
            out.append(("pos", _term(item)))
    return tuple(out)


def _effects(node: SNode) -> tuple[Effect, ...]:
    out = []
    for item in node.value:
        head = item.head()
        if head == "assert" and len(item.value) == 2:
            out.append(Effect("assert", _term(item.value[1])))
        elif head == "clip" and len(item.value) == 2:
            out.append(Effect("clip", _term(item.value[1])))
        elif head == "persist" and len(item.value) == 3:
            out.append(Effect("persist", _term(item.value[2]), float(item.value[1].value)))
        else:
            raise SexprError(f"malformed effect {head!r}", item.line, item.col)
    return tuple(out)
