"""Fluent networks: evaluation, compilation to regions, textual form."""

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from planproj import fluents, geom2d
from planproj.fluents import (And, ChangesModel, Cmp, Const, Dist, Eq, Input,
                              Not, NotCompilable, Or, UnboundInput)
from planproj.geom2d import Point
from planproj.sexpr import SexprError, parse_one
from planproj.terms import render


def test_eval_gate_kinds():
    b = {"robot-x": 3.0, "robot-y": 4.0, "door": True, "color": "red"}
    assert fluents.eval_network(Const(2.5), b) == 2.5
    assert fluents.eval_network(Input("robot-x"), b) == 3.0
    assert fluents.eval_network(Dist("robot-x", "robot-y", Point(0, 0)), b) == 5.0
    assert fluents.eval_network(Cmp("lt", Input("robot-x"), 4.0), b) is True
    assert fluents.eval_network(Cmp("ge", Input("robot-x"), 3.0), b) is True
    assert fluents.eval_network(Eq("color", "red"), b) is True
    assert fluents.eval_network(Eq("color", "yellow"), b) is False
    net = And((Input("door"), Not(Eq("color", "blue"))))
    assert fluents.eval_network(net, b) is True
    assert fluents.eval_network(Or((Const(False), Input("door"))), b) is True


def test_eval_unbound_input_names_the_fluent():
    with pytest.raises(UnboundInput) as exc:
        fluents.eval_network(Input("robot-z"), {})
    assert exc.value.fluent_id == "robot-z"
    with pytest.raises(UnboundInput):
        fluents.eval_network(Dist("robot-x", "robot-y", Point(0, 0)),
                             {"robot-x": 1.0})


def test_network_inputs_walks_the_dag():
    net = And((Cmp("lt", Dist("px", "py", Point(0, 0)), 5.0),
               Or((Eq("door", True), Not(Input("flag"))))))
    assert fluents.network_inputs(net) == {"px", "py", "door", "flag"}


def test_flatten_inlines_local_definitions():
    defs = {"near-desk": Cmp("lt", Dist("robot-x", "robot-y",
                                        Point(800, 100)), 60.0)}
    net = And((Input("near-desk"), Input("door")))
    flat = fluents.flatten(net, defs)
    assert flat == And((defs["near-desk"], Input("door")))


def test_changes_model():
    changes = ChangesModel(frozenset({("low-level-navigation-plan", "x"),
                                      ("low-level-navigation-plan", "y")}))
    assert changes.changed_vars("low-level-navigation-plan") == {"x", "y"}
    assert changes.changed_vars("grasp") == set()


# --- compilation to regions --------------------------------------------------

def test_compile_basic_shapes():
    disk = fluents.compile_to_region(
        Cmp("lt", Dist("robot-x", "robot-y", Point(200, 200)), 40.0))
    assert disk == geom2d.Disk(Point(200, 200), 40.0)
    outside = fluents.compile_to_region(
        Cmp("gt", Dist("robot-x", "robot-y", Point(200, 200)), 40.0))
    assert outside == geom2d.Complement(disk)
    above = fluents.compile_to_region(Cmp("gt", Input("robot-y"), 200.0))
    assert above == geom2d.HalfPlane("y", 200.0, "above")


def test_compile_rejects_non_position_gates():
    with pytest.raises(NotCompilable) as exc:
        fluents.compile_to_region(Eq("door", True))
    assert isinstance(exc.value.gate, Eq)
    with pytest.raises(NotCompilable):
        fluents.compile_to_region(Cmp("lt", Input("battery"), 0.2))
    with pytest.raises(NotCompilable):
        fluents.compile_to_region(
            Cmp("lt", Dist("other-x", "other-y", Point(0, 0)), 5.0))


_coord = st.sampled_from(["robot-x", "robot-y"])
_thresh = st.floats(min_value=-50, max_value=50).map(lambda v: round(v, 2))

_pos_leaf = st.one_of(
    st.builds(Cmp, st.sampled_from(["lt", "le", "gt", "ge"]),
              st.builds(Input, _coord), _thresh),
    st.builds(Cmp, st.sampled_from(["lt", "le", "gt", "ge"]),
              st.builds(Dist, st.just("robot-x"), st.just("robot-y"),
                        st.builds(Point,
                                  st.integers(-30, 30).map(float),
                                  st.integers(-30, 30).map(float))),
              st.floats(min_value=1, max_value=60).map(lambda v: round(v, 2))),
)
_pos_net = st.recursive(
    _pos_leaf,
    lambda kids: st.one_of(
        st.builds(Not, kids),
        st.builds(And, st.lists(kids, min_size=1, max_size=3).map(tuple)),
        st.builds(Or, st.lists(kids, min_size=1, max_size=3).map(tuple))),
    max_leaves=6)


def _min_boundary_margin(net, bindings):
    if isinstance(net, Cmp):
        return abs(fluents.eval_network(net.operand, bindings) - net.threshold)
    if isinstance(net, Not):
        return _min_boundary_margin(net.item, bindings)
    if isinstance(net, (And, Or)):
        return min(_min_boundary_margin(g, bindings) for g in net.items)
    return float("inf")


@settings(max_examples=150)
@given(_pos_net,
       st.floats(min_value=-80, max_value=80),
       st.floats(min_value=-80, max_value=80))
def test_compiled_region_agrees_with_evaluation(net, x, y):
    """Away from threshold boundaries, region membership is network truth."""
    bindings = {"robot-x": x, "robot-y": y}
    assume(_min_boundary_margin(net, bindings) > 1e-6)
    region = fluents.compile_to_region(net)
    assert geom2d.point_in_region(Point(x, y), region) == \
        bool(fluents.eval_network(net, bindings))


# --- textual form ------------------------------------------------------------

def test_parse_network_text():
    node = parse_one("(and (> (fluent robot-y) 200)"
                     " (< (dist robot-x robot-y 820 110) 60))")
    net = fluents.network_from_snode(node)
    assert net == And((Cmp("gt", Input("robot-y"), 200.0),
                       Cmp("lt", Dist("robot-x", "robot-y",
                                      Point(820, 110)), 60.0)))


def test_parse_equality_and_errors():
    assert fluents.network_from_snode(parse_one("(= (fluent open-d1) true)")) \
        == Eq("open-d1", True)
    with pytest.raises(SexprError):
        fluents.network_from_snode(parse_one("(= 3 4)"))
    with pytest.raises(SexprError) as exc:
        fluents.network_from_snode(parse_one("(< (fluent robot-x) oops)"))
    assert exc.value.line == 1


_names = st.from_regex(r"[a-z][a-z0-9\-]{0,6}", fullmatch=True) \
    .filter(lambda s: s not in ("true", "false"))
_net_leaf = st.one_of(
    st.builds(Const, st.booleans()),
    st.builds(Input, _names),
    st.builds(Cmp, st.sampled_from(["lt", "le", "gt", "ge"]),
              st.builds(Input, _names), st.integers(-99, 99).map(float)),
    st.builds(Cmp, st.just("lt"),
              st.builds(Dist, _names, _names,
                        st.builds(Point, st.integers(0, 99).map(float),
                                  st.integers(0, 99).map(float))),
              st.integers(1, 99).map(float)),
    st.builds(Eq, _names, st.one_of(_names, st.booleans(),
                                    st.integers(-99, 99))),
)
_net_any = st.recursive(
    _net_leaf,
    lambda kids: st.one_of(
        st.builds(Not, kids),
        st.builds(And, st.lists(kids, min_size=1, max_size=3).map(tuple)),
        st.builds(Or, st.lists(kids, min_size=1, max_size=3).map(tuple))),
    max_leaves=8)


@given(_net_any)
def test_network_text_round_trip(net):
    text = render(fluents.network_to_sexpr(net))
    assert fluents.network_from_snode(parse_one(text)) == net
