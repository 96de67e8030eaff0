import sys
sys.path.insert(0, "src")
from planproj.geom2d import AxisRect, Point, Disk
from planproj.worldmodel import World, Door, Waypoint
from planproj.crp import parse_plan
from planproj.rules import load_rules
from planproj.projector import project_plan

world = World(
    speeds={"office": 30.0, "doorway": 20.0, "hallway": 80.0},
    rooms={"a-1": AxisRect(0, 400, 0, 200)},
    doors={"d-1": Door("d-1", Point(200, 200), 40.0, ("a-1", "hallway"))},
    waypoints={"w1": Waypoint("w1", Point(200, 250))},
    edges=[],
    locations={"start": Point(200, 100)},
    triggers={},
    mode_regions=[("doorway", Disk(Point(200, 200), 40.0)),
                  ("hallway", AxisRect(0, 1000, 200, 300))],
)

rules = load_rules("""
(e->p mark-passing
  :event (start-passing-door ?d)
  :if ()
  :prob 1.0
  :causes ((assert (passing ?d))))
(e->p unmark-passing
  :event (finish-passing-door ?d)
  :if ()
  :prob 1.0
  :causes ((clip (passing ?d))))
(p->e announce
  :while ((passing ?d))
  :spacing 0.0001
  :occurs (entered-doorway ?d))
(e->p timer-start
  :event (begin (follow-path ?i))
  :if ()
  :prob 1.0
  :causes ((persist 3.0 (warming-up))))
(p->e hum
  :while ((warming-up))
  :spacing 1.5
  :occurs (hum))
""")

plan = parse_plan("(seq (move-to 200 250) (move-to 200 100))")
tl = project_plan(plan, world, None, rules, seed=11, horizon=100.0)
for occ in tl.occurrences:
    print(f"{occ.date:8.3f} c{occ.event_class} {occ.event} +{list(occ.opened)} -{list(occ.closed)}")
ann = tl.find_occurrences(("entered-doorway", "?d"))
assert len(ann) == 2, f"trigger fired {len(ann)} times"  # once per pass, both directions
hums = tl.find_occurrences(("hum",))
print("hums:", len(hums), "at", [f"{o.date:.2f}" for o in hums])
for o in hums:
    assert tl.holds_at(("warming-up",), o.date, "before"), o
exp = tl.find_occurrences(("expire", "?p"))
assert any(o.event[1] == ("warming-up",) for o in exp), "persist expiry missing"

# hum frequency sanity under the window-Bernoulli-then-uniform scheme: two
# exposure windows of width 2*tau give about 1.7 events each (the scheme is
# exact only in the small-window limit)
import statistics
counts = []
for s in range(300):
    t = project_plan(plan, world, None, rules, seed=f"f/{s}", horizon=100.0)
    counts.append(len(t.find_occurrences(("hum",))))
m = statistics.mean(counts)
print("mean hums:", m)
assert 3.0 < m < 3.9, m

# byte-identical reproducibility
a = project_plan(plan, world, None, rules, seed=42, horizon=100.0).to_jsonl()
b = project_plan(plan, world, None, rules, seed=42, horizon=100.0).to_jsonl()
assert a == b and len(a) > 100
print("reproducible ok,", len(a.splitlines()), "records")
