"""Timelines: occurrence ordering, occasion semantics, JSONL round trips."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from planproj.timeline import (CLASS_COMPUTATIONAL, CLASS_PHYSICAL,
                               CLASS_SENSOR, Timeline, occasion_holds_at,
                               timeline_from_jsonl)


def test_occurrence_dates_never_run_backwards():
    tl = Timeline()
    tl.add_occurrence(1.0, ("begin", "leg"))
    tl.add_occurrence(1.0, ("clock-tick",))  # equal dates are fine
    tl.add_occurrence(2.5, ("end", "leg"))
    with pytest.raises(ValueError):
        tl.add_occurrence(2.0, ("too", "late"))


def test_equal_date_occurrences_keep_insertion_order():
    tl = Timeline()
    a = tl.add_occurrence(3.0, ("cause",), CLASS_PHYSICAL)
    b = tl.add_occurrence(3.0, ("effect",), CLASS_COMPUTATIONAL)
    assert tl.events() == [("cause",), ("effect",)]
    assert a.sort_key() < b.sort_key()
    # class ranks order independent same-date events when sorted externally
    c = tl.add_occurrence(3.0, ("reading",), CLASS_SENSOR)
    assert sorted([c, b], key=lambda o: o.sort_key())[0] is c


def test_find_occurrences_matches_patterns():
    tl = Timeline()
    tl.add_occurrence(1.0, ("pass-waypoint", 1))
    tl.add_occurrence(2.0, ("pass-waypoint", 2))
    tl.add_occurrence(3.0, ("set-travel-mode", "hallway"))
    hits = tl.find_occurrences(("pass-waypoint", "?k"))
    assert [o.event for o in hits] == [("pass-waypoint", 1),
                                       ("pass-waypoint", 2)]


def test_occasions_are_half_open_on_the_left():
    tl = Timeline()
    assert tl.assert_prop(("open", "d-1"), 2.0) is True
    tl.clip_prop(("open", "d-1"), 5.0)
    p = ("open", "d-1")
    # not yet true approaching the assert date, true just after it
    assert not tl.holds_at(p, 2.0, "before")
    assert tl.holds_at(p, 2.0, "after")
    assert tl.holds_at(p, 3.0, "before")
    # still true approaching the clip date, false just after it
    assert tl.holds_at(p, 5.0, "before")
    assert not tl.holds_at(p, 5.0, "after")
    assert not tl.holds_at(p, 6.0, "before")
    assert occasion_holds_at(tl, p, 3.0) is True


def test_assert_prop_is_idempotent_while_open():
    tl = Timeline()
    assert tl.assert_prop(("carrying", "let-1"), 1.0) is True
    assert tl.assert_prop(("carrying", "let-1"), 4.0) is False
    assert len(tl.occasions[("carrying", "let-1")]) == 1
    tl.clip_prop(("carrying", "let-1"), 6.0)
    # a fresh occasion may open after the old one closed
    assert tl.assert_prop(("carrying", "let-1"), 8.0) is True
    assert len(tl.occasions[("carrying", "let-1")]) == 2


def test_clip_without_open_occasion_is_a_noop():
    tl = Timeline()
    assert tl.clip_prop(("open", "d-1"), 3.0) is False
    tl.assert_prop(("open", "d-1"), 5.0)
    # clipping strictly before the start leaves the occasion open
    assert tl.clip_prop(("open", "d-1"), 4.0) is False
    assert tl.holds_at(("open", "d-1"), 9.0, "before")


def test_holding_lists_props_on_the_requested_side():
    tl = Timeline()
    tl.assert_prop(("a",), 1.0)
    tl.assert_prop(("b",), 3.0)
    tl.clip_prop(("a",), 3.0)
    assert set(tl.holding(3.0, "before")) == {("a",)}
    assert set(tl.holding(3.0, "after")) == {("b",)}


def test_next_expiry_scans_open_persist_occasions():
    tl = Timeline()
    tl.assert_prop(("hum",), 1.0, expiry=4.0)
    tl.assert_prop(("buzz",), 2.0, expiry=3.0)
    assert tl.next_expiry(0.0) == (3.0, ("buzz",))
    assert tl.next_expiry(3.0) == (4.0, ("hum",))
    tl.clip_prop(("hum",), 3.5)
    assert tl.next_expiry(3.0) is None


def test_jsonl_round_trip_preserves_occurrences():
    tl = Timeline()
    tl.add_occurrence(0.0, ("begin", ("low-level-navigation-plan", "nav-1")),
                      CLASS_COMPUTATIONAL, x=200.0, y=100.0,
                      mode="office@wp0")
    tl.add_occurrence(2.0, ("set-travel-mode", "doorway"), CLASS_PHYSICAL,
                      x=200.0, y=160.0, mode="doorway@wp0",
                      opened=(("travel-mode", "doorway"),),
                      closed=(("travel-mode", "office"),))
    tl.add_occurrence(2.0, ("passive-sensor-update", "in-zone", True),
                      CLASS_SENSOR)
    text = tl.to_jsonl()
    back = timeline_from_jsonl(text)
    assert [(o.date, o.event, o.event_class, o.x, o.y, o.mode,
             o.opened, o.closed) for o in back.occurrences] == \
        [(o.date, o.event, o.event_class, o.x, o.y, o.mode,
          o.opened, o.closed) for o in tl.occurrences]
    assert back.to_jsonl() == text


def test_empty_timeline_serializes_to_empty_text():
    assert Timeline().to_jsonl() == ""
    assert timeline_from_jsonl("").occurrences == []


@given(st.lists(st.tuples(st.floats(min_value=0, max_value=100),
                          st.floats(min_value=0.1, max_value=50)),
                max_size=20))
def test_occasion_sides_partition_time(intervals):
    """At any probe date, 'before' and 'after' disagree only at endpoints."""
    tl = Timeline()
    prop = ("p",)
    dates = []
    t = 0.0
    for gap, width in intervals:
        start = t + gap
        end = start + width
        tl.assert_prop(prop, start)
        tl.clip_prop(prop, end)
        dates.extend((start, end))
        t = end
    for d in dates:
        before, after = tl.holds_at(prop, d, "before"), tl.holds_at(prop, d, "after")
        if before != after:
            # flips happen exactly at assert/clip dates
            assert d in dates
    # strictly inside any interval both sides agree
    for i in range(0, len(dates), 2):
        mid = (dates[i] + dates[i + 1]) / 2
        if dates[i] < mid < dates[i + 1]:
            assert tl.holds_at(prop, mid, "before")
            assert tl.holds_at(prop, mid, "after")
