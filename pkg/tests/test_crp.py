"""Concurrent reactive plans: parsing, printing, interpreter semantics."""

from importlib import resources

import pytest

from planproj.crp import nodes
from planproj.crp.interpreter import (DeadlockDetected, FluentChange,
                                      Interpreter, PrimitiveDone, Wakeup)
from planproj.crp.parser import PlanSyntaxError, parse_plan
from planproj.crp.printer import print_plan


# --- parse / print -----------------------------------------------------------

PLAN_TEXTS = [
    "(pick-up let-1)",
    "(seq (pick-up let-1) (put-down let-1))",
    "(par (go-to desk) (estimate-door-angle))",
    "(try-in-parallel (wait-for (fluent a)) (wait-for (fluent b)))",
    "(loop (pick-up box) :until (= (fluent execution-state/box) loaded))",
    "(loop (estimate-door-angle))",
    "(wait-for (> (dist robot-x robot-y 820 110) 60))",
    "(whenever (fluent ping) (pick-up a) (put-down a))",
    "(with-policy (whenever (fluent bump) (set-navigation-mode office))"
    " (go-to desk))",
    "(with-valve arm :priority 3 (pick-up a))",
    "(with-valve arm (pick-up a))",
    "(with-local-fluents ((near (< (dist robot-x robot-y 0 0) 5)))"
    " (wait-for (fluent near)))",
    "(named leg-1 (go-to desk) (pick-up a))",
    "(if (= (fluent color) red) (pick-up let-1))",
    "(set announced true)",
    "(move-to 820 110)",
    "(low-level-nav-plan desk nav-7)",
    "(low-level-nav-plan (path (0 0) (100 0) (100 50)) nav-8)",
    "(look-for (letter red) camera)",
]


@pytest.mark.parametrize("text", PLAN_TEXTS)
def test_print_parse_round_trip(text):
    ast = parse_plan(text)
    assert parse_plan(print_plan(ast)) == ast


def test_parse_specific_shapes():
    ast = parse_plan("(seq (pick-up let-1) (put-down let-1))")
    assert ast == nodes.Seq((nodes.Primitive(nodes.PickUp("let-1")),
                             nodes.Primitive(nodes.PutDown("let-1"))))
    wv = parse_plan("(with-valve arm :priority 3 (pick-up a))")
    assert isinstance(wv, nodes.WithValve)
    assert (wv.valve, wv.priority) == ("arm", 3)
    # single-form bodies stay bare, several become a Seq
    assert isinstance(parse_plan("(named x (go-to desk))").body,
                      nodes.Primitive)
    assert isinstance(parse_plan("(named x (go-to desk) (go-to desk))").body,
                      nodes.Seq)


def test_parse_errors_carry_positions():
    with pytest.raises(PlanSyntaxError) as exc:
        parse_plan("(seq\n  (bogus))")
    assert exc.value.line == 2
    with pytest.raises(PlanSyntaxError):
        parse_plan("(seq)")
    with pytest.raises(PlanSyntaxError) as exc:
        parse_plan("(set-navigation-mode flying)")
    assert "office" in exc.value.expected
    with pytest.raises(PlanSyntaxError):
        parse_plan("(pick-up a b)")
    with pytest.raises(PlanSyntaxError):
        parse_plan("(with-valve)")


def test_shipped_plans_round_trip():
    data = resources.files("planproj") / "data"
    for name in ("tour-initial.plan", "tour-revised.plan",
                 "grand-tour.plan"):
        ast = parse_plan((data / name).read_text())
        assert parse_plan(print_plan(ast)) == ast


# --- interpreter: sequencing -------------------------------------------------

def _actions(reqs):
    return [r.action for r in reqs]


def test_seq_runs_primitives_one_at_a_time():
    it = Interpreter(parse_plan("(seq (pick-up let-1) (put-down let-1))"))
    reqs = it.step(Wakeup())
    assert _actions(reqs) == [nodes.PickUp("let-1")]
    assert not it.done
    reqs = it.step(PrimitiveDone(reqs[0].request_id))
    assert _actions(reqs) == [nodes.PutDown("let-1")]
    assert it.store["execution-state/let-1"] == "loaded"
    it.step(PrimitiveDone(reqs[0].request_id))
    assert it.done
    assert it.store["execution-state/let-1"] == "delivered"


def test_par_waits_for_every_branch():
    it = Interpreter(parse_plan("(par (pick-up a) (pick-up b))"))
    reqs = it.step(Wakeup())
    assert _actions(reqs) == [nodes.PickUp("a"), nodes.PickUp("b")]
    it.step(PrimitiveDone(reqs[0].request_id))
    assert not it.done
    it.step(PrimitiveDone(reqs[1].request_id))
    assert it.done


def test_try_in_parallel_kills_losers():
    it = Interpreter(parse_plan("(try-in-parallel (pick-up a) (pick-up b))"))
    reqs = it.step(Wakeup())
    assert len(reqs) == 2
    it.step(PrimitiveDone(reqs[0].request_id))
    assert it.done
    assert reqs[1].aborted
    assert reqs[1] in it.aborted_requests


def test_failed_primitive_does_not_mark_execution_state():
    it = Interpreter(parse_plan("(seq (pick-up frag) (put-down frag))"))
    reqs = it.step(Wakeup())
    reqs = it.step(PrimitiveDone(reqs[0].request_id, ok=False))
    assert "execution-state/frag" not in it.store
    assert _actions(reqs) == [nodes.PutDown("frag")]
    it.step(PrimitiveDone(reqs[0].request_id))
    assert it.store["execution-state/frag"] == "delivered"


def test_loop_until_retries_until_state_reached():
    it = Interpreter(parse_plan(
        "(loop (pick-up box) :until (= (fluent execution-state/box) loaded))"))
    reqs = it.step(Wakeup())
    assert _actions(reqs) == [nodes.PickUp("box")]
    reqs = it.step(PrimitiveDone(reqs[0].request_id, ok=False))
    assert _actions(reqs) == [nodes.PickUp("box")]  # retried
    it.step(PrimitiveDone(reqs[0].request_id))
    assert it.done


def test_if_evaluates_guard_once():
    it = Interpreter(parse_plan("(seq (set flag true) (if (fluent flag)"
                                " (pick-up a)))"))
    reqs = it.step(Wakeup())
    assert _actions(reqs) == [nodes.PickUp("a")]
    it2 = Interpreter(parse_plan("(if (fluent nope) (pick-up a))"))
    assert it2.step(Wakeup()) == []
    assert it2.done


# --- interpreter: waiting ----------------------------------------------------

def test_wait_for_is_level_triggered():
    it = Interpreter(parse_plan("(seq (wait-for (fluent go)) (pick-up a))"))
    assert it.step(Wakeup()) == []
    assert len(it.pending_items()) == 1
    reqs = it.step(FluentChange("go", True))
    assert _actions(reqs) == [nodes.PickUp("a")]
    assert it.pending_items() == []
    # already-true condition never blocks
    it2 = Interpreter(parse_plan("(seq (wait-for (fluent go)) (pick-up a))"),
                      fluent_values={"go": True})
    assert _actions(it2.step(Wakeup())) == [nodes.PickUp("a")]


def test_wait_for_sees_local_fluent_definitions():
    it = Interpreter(parse_plan(
        "(with-local-fluents ((near (< (fluent robot-x) 10)))"
        " (seq (wait-for (fluent near)) (pick-up a)))"),
        fluent_values={"robot-x": 50.0})
    assert it.step(Wakeup()) == []
    # the registered condition is flattened down to primitive inputs
    from planproj.fluents import Cmp, Input
    assert it.pending_conditions() == [Cmp("lt", Input("robot-x"), 10.0)]
    reqs = it.step(FluentChange("robot-x", 5.0))
    assert _actions(reqs) == [nodes.PickUp("a")]


def test_whenever_fires_on_rising_edges_and_suppresses_reentry():
    it = Interpreter(parse_plan(
        "(with-policy (whenever (fluent ping) (pick-up a))"
        " (wait-for (fluent stop)))"))
    assert it.step(Wakeup()) == []
    first = it.step(FluentChange("ping", True))
    assert _actions(first) == [nodes.PickUp("a")]
    assert it.step(FluentChange("ping", False)) == []
    # a new edge while the body still runs is swallowed
    assert it.step(FluentChange("ping", True)) == []
    assert it.step(PrimitiveDone(first[0].request_id)) == []
    # holding the level high is not an edge; it must fall first
    it.step(FluentChange("ping", False))
    again = it.step(FluentChange("ping", True))
    assert _actions(again) == [nodes.PickUp("a")]
    it.step(PrimitiveDone(again[0].request_id))
    it.step(FluentChange("stop", True))
    assert it.done
    assert it.pending_items() == []


def test_whenever_initially_true_condition_waits_for_a_fresh_edge():
    it = Interpreter(parse_plan(
        "(with-policy (whenever (fluent ping) (pick-up a))"
        " (wait-for (fluent stop)))"),
        fluent_values={"ping": True})
    assert it.step(Wakeup()) == []


def test_policy_is_killed_with_its_primitive_when_body_finishes():
    it = Interpreter(parse_plan(
        "(with-policy (pick-up guard-act) (pick-up body-act))"))
    reqs = it.step(Wakeup())
    assert _actions(reqs) == [nodes.PickUp("guard-act"),
                              nodes.PickUp("body-act")]
    it.step(PrimitiveDone(reqs[1].request_id))
    assert it.done
    assert reqs[0].aborted


# --- interpreter: valves -----------------------------------------------------

def test_valve_grants_fifo_among_equal_priorities():
    it = Interpreter(parse_plan(
        "(par (with-valve arm (pick-up a))"
        " (with-valve arm (pick-up b))"
        " (with-valve arm (pick-up c)))"))
    order = []
    reqs = it.step(Wakeup())
    while reqs:
        order.append(reqs[0].action.obj)
        reqs = it.step(PrimitiveDone(reqs[0].request_id))
    assert order == ["a", "b", "c"]
    assert it.done


def test_higher_priority_preempts_and_owner_resumes_after():
    it = Interpreter(parse_plan(
        "(par (with-valve arm (seq (pick-up a) (put-down a)))"
        " (seq (wait-for (fluent go))"
        "  (with-valve arm :priority 5 (pick-up b))))"))
    first = it.step(Wakeup())
    assert _actions(first) == [nodes.PickUp("a")]
    stolen = it.step(FluentChange("go", True))
    assert _actions(stolen) == [nodes.PickUp("b")]
    assert not first[0].aborted  # in-flight work is not torn down
    # the preempted scope gates its next primitive until the valve returns
    assert it.step(PrimitiveDone(first[0].request_id)) == []
    resumed = it.step(PrimitiveDone(stolen[0].request_id))
    assert _actions(resumed) == [nodes.PutDown("a")]
    it.step(PrimitiveDone(resumed[0].request_id))
    assert it.done


def test_external_holders_share_the_valve_table():
    it = Interpreter(parse_plan("(with-valve arm (pick-up a))"))
    assert it.acquire_valve("door-opener", "arm", 2) is True
    assert it.valve_owner("arm") == "__interrupted/arm/door-opener"
    assert it.step(Wakeup()) == []  # plan queues behind the holder
    it.release_valve("door-opener", "arm")
    reqs = it.step(Wakeup())
    assert _actions(reqs) == [nodes.PickUp("a")]


def test_valve_cycle_is_reported_as_deadlock():
    it = Interpreter(parse_plan(
        "(par (with-valve left-arm (seq (wait-for (fluent go))"
        "  (with-valve right-arm (pick-up x))))"
        " (with-valve right-arm (seq (wait-for (fluent go))"
        "  (with-valve left-arm (pick-up y)))))"))
    assert it.step(Wakeup()) == []
    with pytest.raises(DeadlockDetected) as exc:
        it.step(FluentChange("go", True))
    assert "left-arm" in str(exc.value)


# --- determinism -------------------------------------------------------------

def test_identical_event_sequences_replay_identically():
    text = ("(par (with-valve arm (seq (pick-up a) (put-down a)))"
            " (seq (wait-for (fluent go))"
            "  (with-valve arm :priority 5 (pick-up b))))")

    def drive(it):
        states = []
        reqs = it.step(Wakeup())
        states.append((it.observable_state(), tuple(_actions(reqs))))
        pending = list(reqs)
        events = [FluentChange("go", True)]
        while events or pending:
            ev = events.pop(0) if events else PrimitiveDone(
                pending.pop(0).request_id)
            reqs = it.step(ev)
            pending.extend(reqs)
            states.append((it.observable_state(), tuple(_actions(reqs))))
        return states

    a = drive(Interpreter(parse_plan(text)))
    b = drive(Interpreter(parse_plan(text)))
    assert a == b
