"""The s-expression reader: atom typing, positions, round trips."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from planproj.sexpr import SexprError, SNode, parse, parse_one, render, strip


def test_atom_typing():
    node = parse_one("(go 3 -4 2.5 true false :key name ?var)")
    assert strip(node) == ("go", 3, -4, 2.5, True, False, ":key", "name", "?var")


def test_integers_stay_integers():
    assert strip(parse_one("7")) == 7
    assert isinstance(strip(parse_one("7")), int)
    assert strip(parse_one("7.0")) == 7.0
    assert isinstance(strip(parse_one("7.0")), float)


def test_nesting_and_positions():
    nodes = parse("(a (b c)\n   (d))")
    assert len(nodes) == 1
    root = nodes[0]
    assert root.is_list and root.head() == "a"
    inner = root.value[2]
    assert isinstance(inner, SNode)
    assert inner.line == 2 and inner.col == 4


def test_comments_are_skipped():
    node = parse_one("; leading note\n(x 1) ; trailing")
    assert strip(node) == ("x", 1)


def test_unbalanced_open_reports_position():
    with pytest.raises(SexprError) as err:
        parse("(a (b 1)")
    assert err.value.line == 1
    assert "line 1" in str(err.value)


def test_stray_closer_reports_position():
    with pytest.raises(SexprError) as err:
        parse("(a)\n  )")
    assert err.value.line == 2
    assert err.value.col == 3


def test_parse_one_rejects_extra_forms():
    with pytest.raises(SexprError):
        parse_one("(a) (b)")
    with pytest.raises(SexprError):
        parse_one("")


def test_render_parse_round_trip_handwritten():
    text = "(e->p pick :event (begin (pick-up ?ob)) :prob 0.9 :causes ((assert (carrying ?ob))))"
    value = strip(parse_one(text))
    assert strip(parse_one(render(value))) == value


symbols = st.from_regex(r"[a-z][a-z0-9\-]{0,8}", fullmatch=True) \
    .filter(lambda s: s not in ("true", "false"))
atoms = st.one_of(
    symbols,
    st.integers(-10 ** 6, 10 ** 6),
    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
        .filter(lambda v: v != int(v)),
    st.booleans(),
)
values = st.recursive(atoms, lambda kids: st.lists(kids, max_size=5)
                      .map(tuple), max_leaves=20)


@given(values)
def test_render_parse_round_trip(value):
    assert strip(parse_one(render(value))) == value


@given(values)
def test_rendering_is_stable(value):
    once = render(value)
    assert render(strip(parse_one(once))) == once
