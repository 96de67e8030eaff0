import math, sys
sys.path.insert(0, "src")
from planproj.automaton import JumpEdge, ModeGraph, SuccessorRange, make_mode
from planproj.geom2d import HalfPlane
from planproj.refproj import (RefConfig, choose_ref_parameters, mode_sequence,
                              project_clock_tick, mode_sequence_distribution)
from planproj.errors import DomainError

# choose_ref_parameters
tau, dt = choose_ref_parameters(math.exp(-1), 2.0)
assert abs(tau - 1.0) < 1e-12 and abs(dt - 1.0) < 1e-12
tau, dt = choose_ref_parameters(0.05, 0.5)
print(f"tau={tau:.5f} dt={dt}")
assert abs(tau - 0.08345) < 5e-5 and dt == 0.25
try:
    choose_ref_parameters(1.5, 1.0)
    raise SystemExit("no DomainError")
except DomainError:
    pass
import warnings
with warnings.catch_warnings(record=True) as w:
    warnings.simplefilter("always")
    choose_ref_parameters(0.95, 1.0)
    assert any("diverge" in str(x.message) for x in w)
print("parameters ok")

# single mode, no edges: ticks only, position integrates the flow
idle = make_mode("drift", {"x": 3.0, "y": -1.0})
g = ModeGraph({"drift": idle}, "drift", {"x": 10.0, "y": 20.0})
tl = project_clock_tick(g, None, RefConfig(1.0, 1.0, 10.0, seed=5))
assert all(o.event[0] == "clock-tick" for o in tl.occurrences)
last = tl.occurrences[-1]
print("ticks:", len(tl.occurrences), "final:", (last.x, last.y), "flag:", tl.horizon_exceeded)
assert len(tl.occurrences) == 11
assert abs(last.x - 40.0) < 1e-9 and abs(last.y - 10.0) < 1e-9
assert not tl.horizon_exceeded

# now with an edge that never fires (condition never true): full tick ladder
never = HalfPlane("x", 1e9, "above")
m2 = make_mode("run", {"x": 3.0, "y": -1.0},
               edges=[JumpEdge("run", "e-never", never,
                               (SuccessorRange("run", 1, 1),), 0)])
g2 = ModeGraph({"run": m2}, "run", {"x": 10.0, "y": 20.0})
tl2 = project_clock_tick(g2, None, RefConfig(1.0, 1.0, 10.0, seed=5))
ticks = [o for o in tl2.occurrences if o.event[0] == "clock-tick"]
assert len(ticks) == 11, len(ticks)
assert abs(ticks[-1].x - 40.0) < 1e-9 and abs(ticks[-1].y - 10.0) < 1e-9
assert tl2.horizon_exceeded
print("flow integration ok")

# a two-successor jump: ranges [1,12]/[13,16] over 2^4 -> 75%/25%
gate = HalfPlane("x", 5.0, "above")
split = make_mode("go", {"x": 1.0},
                  edges=[JumpEdge("go", "e-split", gate,
                                  (SuccessorRange("fast", 1, 12),
                                   SuccessorRange("slow", 13, 16)), 4)])
fast = make_mode("fast", {"x": 2.0})
slow = make_mode("slow", {"x": 0.5})
g3 = ModeGraph({"go": split, "fast": fast, "slow": slow}, "go", {"x": 0.0, "y": 0.0})
counts = mode_sequence_distribution(g3, None, RefConfig(0.25, 0.1, 30.0, seed=9), 2000)
total = sum(counts.values())
p_fast = counts[("go", "fast")] / total
print("p(fast) =", p_fast, dict(counts))
assert abs(p_fast - 0.75) < 0.03
# every run jumped exactly once
assert set(counts) == {("go", "fast"), ("go", "slow")}

# Lemma 2 smoke: onset off the tick grid (x>5.1 at flow 1 -> t=5.1),
# jump within delta=0.5 of onset at eps=0.05
gate2 = HalfPlane("x", 5.1, "above")
split2 = make_mode("go", {"x": 1.0},
                   edges=[JumpEdge("go", "e-split", gate2,
                                   (SuccessorRange("fast", 1, 12),
                                    SuccessorRange("slow", 13, 16)), 4)])
g4 = ModeGraph({"go": split2, "fast": fast, "slow": slow}, "go", {"x": 0.0, "y": 0.0})
tau, dt = choose_ref_parameters(0.05, 0.5)
ok = 0
N = 1000
for i in range(N):
    tl = project_clock_tick(g4, None, RefConfig(dt, tau, 30.0, seed=f"lem/{i}"))
    jump = next(o for o in tl.occurrences if o.event[0] == "jump")
    if jump.date - 5.1 <= 0.5 + 1e-9:
        ok += 1
print("lemma2 fraction:", ok / N)
assert ok / N >= 0.95
print("refproj smoke ok")
