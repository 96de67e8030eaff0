"""Structured terms: matching, substitution, text round trips."""

from hypothesis import given
from hypothesis import strategies as st

from planproj import terms
from planproj.sexpr import parse_one, strip


def test_match_binds_variables():
    b = terms.match(("pick-up", "?ob"), ("pick-up", "let-1"))
    assert b == {"?ob": "let-1"}
    assert terms.match(("pick-up", "?ob"), ("put-down", "let-1")) is None


def test_match_repeated_variable_must_agree():
    assert terms.match(("eq", "?x", "?x"), ("eq", 3, 3)) == {"?x": 3}
    assert terms.match(("eq", "?x", "?x"), ("eq", 3, 4)) is None


def test_match_nested():
    pat = ("begin", ("pick-up", "?ob"))
    assert terms.match(pat, ("begin", ("pick-up", "let-2"))) == {"?ob": "let-2"}
    assert terms.match(pat, ("begin", ("pick-up",))) is None


def test_substitute_and_ground():
    t = terms.substitute(("color", "?ob", "?c"), {"?ob": "let-1", "?c": "red"})
    assert t == ("color", "let-1", "red")
    assert terms.is_ground(t)
    assert not terms.is_ground(("color", "?ob", "red"))


def test_render_round_trip_basics():
    for t in (("open", "a-113"),
              ("passive-sensor-update", "in-a-120", True),
              ("pass-waypoint", 3),
              ("now", 2.5),
              "randomize"):
        back = terms.term_from_sexpr(strip(parse_one(terms.render(t))))
        assert back == t


leaf = st.one_of(
    st.from_regex(r"[a-z][a-z0-9\-]{0,6}", fullmatch=True)
        .filter(lambda s: s not in ("true", "false")),
    st.integers(-1000, 1000),
    st.booleans(),
)
term_trees = st.recursive(leaf, lambda kids: st.lists(kids, min_size=1,
                                                      max_size=4).map(tuple),
                          max_leaves=12)


@given(term_trees)
def test_render_round_trip(t):
    assert terms.term_from_sexpr(strip(parse_one(terms.render(t)))) == t


@given(term_trees)
def test_match_is_reflexive_on_ground_terms(t):
    if terms.is_ground(t):
        assert terms.match(t, t) == {}


def test_fluent_id_for_term_is_injective_enough():
    a = terms.fluent_id_for_term(("open", "a-113"))
    b = terms.fluent_id_for_term(("open", "a-111"))
    assert a != b
    assert terms.fluent_id_for_term(("open", "a-113")) == a
