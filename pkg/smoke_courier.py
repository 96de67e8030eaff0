import sys, time
sys.path.insert(0, "src")
from planproj.courier import (build_fixture_world, courier_requests, courier_beliefs,
                              courier_rules, initial_tour, revised_tour,
                              apply_revision_rule, AddOrdering, DropOpportunity,
                              CycleIntroduced, classify_scenarios, classify_scenario,
                              grand_tour_plan, heuristic_schedule)
from planproj.geom2d import Point, point_in_region, path_region_crossings
from planproj.crp import parse_plan
from planproj.crp.printer import print_plan
from planproj.projector import project_plan
from planproj.flaw import sample_scenarios, count_flaw
from planproj.errors import DomainError

world = build_fixture_world()
print("rooms:", len(world.rooms), "doors:", len(world.doors),
      "waypoints:", len(world.waypoints))

# published in-room test: 860 <= x <= 1265 and y < 817
trig = world.triggers["in-a-120"]
assert point_in_region(Point(1000, 700), trig)
assert not point_in_region(Point(800, 700), trig)
assert not point_in_region(Point(1300, 700), trig)
assert not point_in_region(Point(1000, 900), trig)
assert point_in_region(Point(860, 816.9), trig)

# waypoint route a-117 -> a-111 crosses exactly two doorway disks
route = world.route(world.locations["desk-a-117"], world.locations["desk-a-111"])
hits = 0
for name, door in world.doors.items():
    cr = path_region_crossings(route, door.passing_region)
    if cr:
        print("  crosses", name, [c.kind for c in cr])
        hits += 1
assert hits == 2, hits

tour = initial_tour(world)
print("unrevised sequence:", tour.sequence, "floating:", tour.floating)
assert tour.sequence == ("enter-a-111", "deliver-a-120", "deliver-a-117")
assert tour.floating == ("enter-a-113",)

rev = revised_tour(world)
print("revised sequence:", rev.sequence, "floating:", rev.floating)
assert rev.sequence == ("enter-a-113", "deliver-a-120", "enter-a-111", "deliver-a-117")
assert rev.floating == ()

# plan text round-trips
text = tour.to_plan_text()
assert print_plan(parse_plan(text)) == text
text_rev = rev.to_plan_text()
assert print_plan(parse_plan(text_rev)) == text_rev
print("--- unrevised plan ---")
print(text)

# revision errors
try:
    apply_revision_rule(rev, AddOrdering("enter-a-111", "deliver-a-120"))
    raise SystemExit("no CycleIntroduced")
except CycleIntroduced:
    pass
try:
    apply_revision_rule(tour, AddOrdering("nope", "enter-a-111"))
    raise SystemExit("no DomainError")
except DomainError:
    pass

# drop-opportunity equals the single-request tour
dropped = apply_revision_rule(tour, DropOpportunity("enter-a-113"))
solo = heuristic_schedule(courier_requests()[:1], world.locations["start"], world)
assert dropped.sequence == solo.sequence == ("enter-a-111", "deliver-a-117")
assert dropped.floating == ()

# single request -> [pickup, putdown]
assert solo.sequence == ("enter-a-111", "deliver-a-117")

rules = courier_rules()
beliefs = courier_beliefs()
flaw = rules.flaws["same-color-mixup"]

# one open+yellow projection end-to-end, checked by hand
from planproj.worldmodel import BeliefState, BeliefEntry
force = BeliefState([BeliefEntry(("open", "a-113"), "constant", value=True),
                     BeliefEntry(("color", "let-2", "?"), "choice",
                                 values=("yellow",), weights=(1.0,))])
plan = parse_plan(text)
tl = project_plan(plan, world, force, rules, seed=11, horizon=900.0,
                  start=world.locations["start"])
evs = [o.event for o in tl.occurrences]
order = [e for e in evs if e[0] in ("begin", "end") and e[1][0] in ("pick-up", "put-down")]
print("pick/put order:", order)
assert order == [("begin", ("pick-up", "let-2")), ("end", ("pick-up", "let-2")),
                 ("begin", ("pick-up", "let-1")), ("end", ("pick-up", "let-1")),
                 ("begin", ("put-down", "let-2")), ("end", ("put-down", "let-2")),
                 ("begin", ("put-down", "let-1")), ("end", ("put-down", "let-1"))]
assert ("failure", "two-same-color") in tl.occasions
assert classify_scenario(tl) == "opportunity-taken-failure"
assert not tl.horizon_exceeded

# closed-door projection completes cleanly
shut = BeliefState([BeliefEntry(("open", "a-113"), "constant", value=False)])
tl2 = project_plan(plan, world, shut, rules, seed=12, horizon=900.0,
                   start=world.locations["start"])
order2 = [e for e in [o.event for o in tl2.occurrences]
          if e[0] in ("begin", "end") and e[1][0] in ("pick-up", "put-down")]
assert [o[1][1] for o in order2] == ["let-1"] * 4
assert classify_scenario(tl2) == "door-closed"
assert not tl2.horizon_exceeded

# revised + open + yellow: no failure
plan_rev = parse_plan(text_rev)
tl3 = project_plan(plan_rev, world, force, rules, seed=13, horizon=900.0,
                   start=world.locations["start"])
order3 = [e for e in [o.event for o in tl3.occurrences]
          if e[0] == "begin" and e[1][0] in ("pick-up", "put-down")]
print("revised order:", order3)
assert order3 == [("begin", ("pick-up", "let-2")), ("begin", ("put-down", "let-2")),
                  ("begin", ("pick-up", "let-1")), ("begin", ("put-down", "let-1"))]
assert ("failure", "two-same-color") not in tl3.occasions
assert classify_scenario(tl3) == "opportunity-taken-success"

# statistics over 300 scenarios (quick version of the acceptance run)
t0 = time.time()
runs = sample_scenarios(plan, world, beliefs, rules, 300, root_seed=42, horizon=900.0,
                        start=world.locations["start"])
dt = time.time() - t0
c = count_flaw(runs, flaw)
counts = classify_scenarios(runs)
print(f"unrevised: flaw {c}/300 in {dt:.1f}s; counts {counts}")
assert counts["unclassified"] == 0
assert sum(counts.values()) == 300
assert counts["opportunity-taken-failure"] == c
# p=0.25, 3 sigma over 300 ~ +-0.075
assert 0.25 - 0.075 <= c / 300 <= 0.25 + 0.075, c

runs_rev = sample_scenarios(plan_rev, world, beliefs, rules, 300, root_seed=42,
                            horizon=900.0, start=world.locations["start"])
c_rev = count_flaw(runs_rev, flaw)
counts_rev = classify_scenarios(runs_rev)
print("revised: flaw", c_rev, "counts", counts_rev)
assert c_rev == 0
assert counts_rev["unclassified"] == 0
assert counts_rev["opportunity-taken-failure"] == 0

# grand tour: events and reschedules
from planproj.projector import HorizonExceeded
gplan = grand_tour_plan(world)
t0 = time.time()
try:
    gtl = project_plan(gplan, world, None, rules, seed=5, horizon=2400.0,
                       start=world.locations["start"])
except HorizonExceeded as err:
    gtl = err.timeline
    print("GRAND TOUR HIT HORIZON; tail of timeline:")
    for occ in gtl.occurrences[-25:]:
        print(f"  {occ.date:8.1f}  {occ.event}  @({occ.x:.0f},{occ.y:.0f})")
    print("stats", gtl.stats)
    raise SystemExit(1)
dt = time.time() - t0
print(f"grand tour: {len(gtl.occurrences)} events, stats {gtl.stats} in {dt:.1f}s")
print("courier smoke OK")
