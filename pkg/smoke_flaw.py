import sys
sys.path.insert(0, "src")
from planproj.flaw import (detection_probability, required_sample_size,
                           sample_scenarios, count_flaw, detect_flaw,
                           DetectorSpec, flaw_report)
from planproj.errors import DomainError, Infeasible

# published spot values
assert abs(detection_probability(3, 2, 0.5) - 0.5) < 1e-12
assert abs(detection_probability(4, 2, 0.8) - 0.9728) < 1e-12
v = detection_probability(5, 2, 0.05)
print("false alarm (5,2,5%):", v)
assert 0.0225 < v < 0.0226
assert abs(detection_probability(4, 2, 0.6) - 0.8208) < 1e-12  # exact, not the printed 81.2
for n in (3, 4, 5):
    assert detection_probability(n, 2, 0.05) < 0.023
assert detection_probability(7, 3, 0.0) == 0.0
assert detection_probability(7, 3, 1.0) == 1.0

# domain errors
for bad in [(3, 0, 0.5), (3, 4, 0.5), (3, 2, 1.5)]:
    try:
        detection_probability(*bad)
        raise SystemExit(f"no DomainError for {bad}")
    except DomainError:
        pass

# required_sample_size
print("theta=0.8 tau=0.001 ->", required_sample_size(0.8, 0.001))
assert required_sample_size(0.8, 0.001) == (2, 1)
try:
    required_sample_size(0.001 * (1 + 1e-15), 0.001)
    raise SystemExit("no Infeasible")
except Infeasible:
    pass
try:
    required_sample_size(0.01, 0.05)
    raise SystemExit("no Infeasible for tau>theta")
except Infeasible:
    pass

paper = {0.001: [1331, 100, 44, 17, 8, 3],
         0.01: [None, 121, 49, 17, 8, 3],
         0.05: [None, 392, 78, 22, 9, 3]}
thetas = [0.01, 0.10, 0.20, 0.40, 0.60, 0.80]
for tau, row in paper.items():
    mine = []
    for th in thetas:
        try:
            mine.append(required_sample_size(th, tau)[0])
        except Infeasible:
            mine.append(None)
    marks = ["=" if a == b else "!" for a, b in zip(mine, row)]
    print(f"tau={tau}: mine={mine} paper={row} {marks}")

assert required_sample_size(0.1, 0.01)[0] >= required_sample_size(0.2, 0.01)[0]

# Monte-Carlo on a tiny fixture: a belief-controlled flaw with p=0.5
from planproj.geom2d import AxisRect, Point
from planproj.worldmodel import World, BeliefState, BeliefEntry
from planproj.crp import parse_plan
from planproj.rules import load_rules

world = World(speeds={"office": 30.0}, rooms={"r": AxisRect(0, 100, 0, 100)},
              doors={}, waypoints={}, edges=[], locations={"start": Point(10, 10)},
              triggers={})
beliefs = BeliefState([BeliefEntry(("jammed", "gripper"), "bernoulli", p=0.5)])
rules = load_rules("""
(e->p jam-fails
  :event (begin (pick-up ?o))
  :if ((jammed gripper))
  :prob 1.0
  :causes ((assert (failure stuck))))
(flaw stuck-flaw :exists-occasion (failure stuck))
""")
plan = parse_plan("(seq (move-to 50 50) (pick-up box))")
f = rules.flaws["stuck-flaw"]

runs = sample_scenarios(plan, world, beliefs, rules, 200, root_seed=7, horizon=50.0)
assert len(runs) == 200
c = count_flaw(runs, f)
print("flaw count over 200:", c)
assert 70 <= c <= 130  # p=0.5, 3-sigma-ish band
assert detect_flaw(runs[:4], f, 2) in (True, False)

# determinism: same root seed gives byte-identical timelines
runs2 = sample_scenarios(plan, world, beliefs, rules, 200, root_seed=7, horizon=50.0)
assert all(a.to_jsonl() == b.to_jsonl() for a, b in zip(runs, runs2))
runs3 = sample_scenarios(plan, world, beliefs, rules, 200, root_seed=8, horizon=50.0)
assert any(a.to_jsonl() != b.to_jsonl() for a, b in zip(runs, runs3))

# error recording: a plan that stalls past the horizon is flagged, not fatal
stall = parse_plan("(seq (wait-for (= (fluent never-true) 1)) (pick-up box))")
stalled = sample_scenarios(stall, world, beliefs, rules, 3, root_seed=1, horizon=5.0)
assert len(stalled) == 3
assert all(tl.horizon_exceeded for tl in stalled)

rep = flaw_report(runs, f, DetectorSpec(n=200, k=2, theta=0.25, tau=0.05))
print("report:", rep)
assert rep["count"] == c and rep["decision"] is True
print("flaw smoke OK")
