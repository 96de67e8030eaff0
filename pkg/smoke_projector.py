import sys
sys.path.insert(0, "src")
from planproj.geom2d import AxisRect, Point, Disk
from planproj.worldmodel import World, Door, Waypoint, WorldObject, BeliefState, BeliefEntry
from planproj.crp import parse_plan
from planproj.rules import load_rules
from planproj.projector import project_plan, HorizonExceeded, ProjectorConfig

hall = AxisRect(0, 1000, 200, 300)
world = World(
    speeds={"office": 30.0, "doorway": 20.0, "hallway": 80.0},
    rooms={"a-1": AxisRect(0, 400, 0, 200), "a-2": AxisRect(600, 1000, 0, 200)},
    doors={"d-1": Door("d-1", Point(200, 200), 40.0, ("a-1", "hallway"), open_probability=1.0),
           "d-2": Door("d-2", Point(800, 200), 40.0, ("a-2", "hallway"), open_probability=0.0)},
    waypoints={"w1": Waypoint("w1", Point(200, 250)), "w2": Waypoint("w2", Point(800, 250))},
    edges=[("w1", "w2")],
    locations={"start": Point(200, 100), "desk": Point(800, 100)},
    triggers={},
    mode_regions=[("doorway", Disk(Point(200, 200), 40.0)),
                  ("doorway", Disk(Point(800, 200), 40.0)),
                  ("hallway", hall)],
    default_mode="office",
    objects={"let-1": WorldObject("let-1", Point(820, 110), kind="letter", color="red")},
)

rules = load_rules("""
(e->p pickup-loads
  :event (end (pick-up ?ob))
  :if ()
  :prob 1.0
  :causes ((assert (carrying ?ob))))
""")

plan = parse_plan("""
(seq
  (move-to 200 250)
  (move-to 800 250)
  (move-to 820 110)
  (pick-up let-1))
""")

tl = project_plan(plan, world, None, rules, seed=7, horizon=200.0)
for occ in tl.occurrences:
    print(f"{occ.date:9.3f}  c{occ.event_class}  {occ.mode:18s} ({occ.x:7.1f},{occ.y:7.1f})  ", occ.event,
          " +", [o for o in occ.opened], " -", [c for c in occ.closed])
print("stats:", tl.stats)
assert tl.holds_at(("carrying", "let-1"), tl.occurrences[-1].date, "after")
print("carrying ok")

# horizon: wait-for that never becomes true
plan2 = parse_plan("(wait-for (fluent never-true))")
try:
    project_plan(plan2, world, None, rules, seed=1, horizon=10.0)
    print("ERROR: no HorizonExceeded")
except HorizonExceeded as e:
    print("horizon ok, events:", len(e.timeline.occurrences), "flag:", e.timeline.horizon_exceeded)

# wait-for position networks: the second one registers mid-flight, forcing a
# reschedule of the running navigation
world2 = World(
    speeds=dict(world.speeds), rooms=dict(world.rooms),
    doors={"d-1": world.doors["d-1"],
           "d-2": Door("d-2", Point(800, 200), 40.0, ("a-2", "hallway"), open_probability=1.0)},
    waypoints=dict(world.waypoints), edges=list(world.edges),
    locations=dict(world.locations), triggers={},
    mode_regions=list(world.mode_regions), default_mode="office",
    objects=dict(world.objects),
)
plan3 = parse_plan("""
(par
  (seq (move-to 800 250) (move-to 820 110))
  (seq (wait-for (> robot-x 500))
       (wait-for (< (dist robot-x robot-y 820 110) 15))
       (pick-up let-1)))
""")
tl3 = project_plan(plan3, world2, None, rules, seed=3, horizon=200.0)
got = tl3.find_occurrences(("begin", ("pick-up", "?x")))
print("pick-up begins at", [f"{o.date:.2f}" for o in got], "reschedules:", tl3.stats["reschedules"])
assert len(got) == 1 and tl3.stats["reschedules"] >= 1
print("wait-for network ok")
