"""Timelines: dated occurrences plus occasions (maximal truth intervals).

An occurrence is an instantaneous event token; an occasion is an interval
over which a proposition holds.  Truth changes only at occurrences: every
assert/clip/expiry the projectors perform is anchored to an occurrence
date.  Occasion intervals are (start, end] half-open on the left: a
proposition asserted at t holds just after t and not just before it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import terms
from .terms import Term

# co-occurrence ordering of event classes at equal dates
CLASS_PHYSICAL = 0
CLASS_SENSOR = 1
CLASS_COMPUTATIONAL = 2
CLASS_WAKEUP = 3


@dataclass(frozen=True)
class Occurrence:
    date: float
    event: Term
    event_class: int = CLASS_PHYSICAL
    seq: int = 0  # stable tiebreak, assigned by the timeline
    x: float | None = None
    y: float | None = None
    mode: str | None = None
    opened: tuple[Term, ...] = ()
    closed: tuple[Term, ...] = ()

    def sort_key(self):
        return (self.date, self.event_class, self.seq)


@dataclass
class Occasion:
    """One maximal interval of a proposition; end None while still open."""

    prop: Term
    start: float
    end: float | None = None
    expiry: float | None = None  # scheduled end from a persist effect

    def holds_before(self, t: float) -> bool:
        return self.start < t and (self.end is None or t <= self.end)

    def holds_after(self, t: float) -> bool:
        return self.start <= t and (self.end is None or t < self.end)


class Timeline:
    """Mutable projection record: occurrences in date order plus occasions."""

    def __init__(self):
        self.occurrences: list[Occurrence] = []
        self.occasions: dict[Term, list[Occasion]] = {}
        self.horizon_exceeded: bool = False
        self.stats: dict = {}  # projection bookkeeping (event/reschedule counts)
        self._seq = 0

    # -- occurrences ---------------------------------------------------------

    def add_occurrence(self, date: float, event: Term, event_class: int = CLASS_PHYSICAL,
                       x: float | None = None, y: float | None = None,
                       mode: str | None = None,
                       opened: tuple[Term, ...] = (), closed: tuple[Term, ...] = ()) -> Occurrence:
        occ = Occurrence(date, event, event_class, self._seq, x, y, mode, opened, closed)
        self._seq += 1
        # Dates never run backwards.  At equal dates insertion order is the
        # record (causal cascades stay in cause-then-effect order); the class
        # ordering applies where independent queued events compete.
        if self.occurrences and date < self.occurrences[-1].date:
            raise ValueError(f"occurrence {terms.render(event)} at {date} breaks date order")
        self.occurrences.append(occ)
        return occ

    def events(self) -> list[Term]:
        return [o.event for o in self.occurrences]

    def find_occurrences(self, pattern: Term) -> list[Occurrence]:
        return [o for o in self.occurrences if terms.match(pattern, o.event) is not None]

    # -- occasions -----------------------------------------------------------

    def assert_prop(self, prop: Term, t: float, expiry: float | None = None) -> bool:
        """Open an occasion at t; no-op if the proposition already holds.

        Returns True when a new occasion was opened.
        """
        if self.holds_at(prop, t, "after"):
            return False
        occs = self.occasions.setdefault(prop, [])
        occs.append(Occasion(prop, t, None, expiry))
        return True

    def clip_prop(self, prop: Term, t: float) -> bool:
        """Close the open occasion of ``prop`` at t; no-op if none holds."""
        for occ in reversed(self.occasions.get(prop, [])):
            if occ.end is None and occ.start <= t:
                occ.end = t
                return True
        return False

    def holds_at(self, prop: Term, t: float, side: str = "before") -> bool:
        """Does ``prop`` hold just before (side='before') or after t?"""
        occs = self.occasions.get(prop)
        if not occs:
            return False
        if side == "before":
            return any(o.holds_before(t) for o in occs)
        if side == "after":
            return any(o.holds_after(t) for o in occs)
        raise ValueError(f"side must be 'before' or 'after', got {side!r}")

    def holding(self, t: float, side: str = "before") -> list[Term]:
        """All propositions holding at t on the given side."""
        out = []
        for prop, occs in self.occasions.items():
            if side == "before":
                if any(o.holds_before(t) for o in occs):
                    out.append(prop)
            elif any(o.holds_after(t) for o in occs):
                out.append(prop)
        return out

    def next_expiry(self, after: float) -> tuple[float, Term] | None:
        """Earliest scheduled persist expiry strictly after ``after``."""
        best: tuple[float, Term] | None = None
        for prop, occs in self.occasions.items():
            for occ in occs:
                if occ.end is None and occ.expiry is not None and occ.expiry > after:
                    if best is None or occ.expiry < best[0]:
                        best = (occ.expiry, prop)
        return best

    # -- export --------------------------------------------------------------

    def to_jsonl(self) -> str:
        """One JSON record per occurrence, in order."""
        lines = []
        for o in self.occurrences:
            rec = {
                "date": o.date,
                "event": terms.render(o.event),
                "class": o.event_class,
                "opened": [terms.render(p) for p in o.opened],
                "closed": [terms.render(p) for p in o.closed],
                "x": o.x,
                "y": o.y,
                "mode": o.mode,
            }
            lines.append(json.dumps(rec, sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")


def occasion_holds_at(tl: Timeline, prop: Term, t: float, side: str = "before") -> bool:
    """Module-level query mirroring Timeline.holds_at."""
    return tl.holds_at(prop, t, side)


def timeline_from_jsonl(text: str) -> Timeline:
    """Rebuild a timeline from its occurrence stream.

    Only occurrences travel through JSONL; occasions and stats are
    projection-side bookkeeping and come back empty.
    """
    from .sexpr import parse_one, strip

    def term(s: str) -> Term:
        return terms.term_from_sexpr(strip(parse_one(s)))

    tl = Timeline()
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        tl.add_occurrence(
            rec["date"], term(rec["event"]), rec["class"],
            x=rec.get("x"), y=rec.get("y"), mode=rec.get("mode"),
            opened=tuple(term(p) for p in rec.get("opened", ())),
            closed=tuple(term(p) for p in rec.get("closed", ())))
    return tl
