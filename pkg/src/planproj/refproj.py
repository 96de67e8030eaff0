"""Clock-tick reference projector over control-mode graphs.

Time advances in fixed dt ticks; every tick asserts now(t) and clips the
previous now.  At each tick, each enabled jump edge completes within the
tick window with the exact exponential probability 1 - e^(-dt/tau), and
enabled exogenous rules are sampled the same way.  This projector is an
oracle for the event-driven one: statistically faithful as dt and tau
shrink, and far too slow for production horizons (hundreds of ticks per
run is the intended scale).

Only conditions evaluable from the automaton state are supported: regions
against the interpolated position, fluent networks against a store
synthesized from held occasions, and dwell bounds against time in mode.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass

from . import terms
from .automaton import (
    AutomatonState,
    ControlMode,
    ModeGraph,
    sample_successor_mode,
    enabled_edges,
    state_var_vals,
)
from .errors import DomainError
from .rules import RuleSet, apply_effect_rules, solve_condition_over
from .terms import Term, fluent_id_for_term
from .timeline import CLASS_COMPUTATIONAL, CLASS_PHYSICAL, Timeline


@dataclass(frozen=True)
class RefConfig:
    """Tick width, mean jump delay, horizon, and seed for one projection."""

    dt_clock: float
    tau_jump: float
    horizon: float
    seed: object = 0

    def __post_init__(self):
        if not self.dt_clock > 0:
            raise DomainError(f"dt_clock must be positive, got {self.dt_clock}")
        if not self.tau_jump > 0:
            raise DomainError(f"tau_jump must be positive, got {self.tau_jump}")
        if not self.horizon > 0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")


def choose_ref_parameters(epsilon: float, delta: float) -> tuple[float, float]:
    """Tick parameters making a jump land within delta of condition onset
    with probability at least 1 - epsilon: tau = delta/(2*ln(1/epsilon)),
    dt = delta/2.

    As epsilon approaches 1 the mean delay diverges; a RuntimeWarning is
    emitted once epsilon is 0.9 or above.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if epsilon >= 0.9:
        import warnings

        warnings.warn("epsilon near 1 makes the mean jump delay diverge",
                      RuntimeWarning, stacklevel=2)
    tau = delta / (2.0 * math.log(1.0 / epsilon))
    dt = delta / 2.0
    return tau, dt


def _trunc_exp(dt: float, tau: float, rng) -> float:
    """Exponential delay conditioned on landing within (0, dt]."""
    u = rng.random()
    return -tau * math.log(1.0 - u * (1.0 - math.exp(-dt / tau)))


def _store_from(tl: Timeline, t: float, vals: dict) -> dict:
    store = {"robot-x": vals.get("x", 0.0), "robot-y": vals.get("y", 0.0)}
    for prop in tl.holding(t, "after"):
        store[fluent_id_for_term(prop)] = True
    return store


def project_clock_tick(automaton: ModeGraph, rules: RuleSet | None,
                       cfg: RefConfig) -> Timeline:
    """Project the mode graph tick by tick until a terminal mode or the
    horizon.

    Each tick records a clock-tick occurrence swapping the now occasion.
    Mode/flow swaps are recorded as clip/assert pairs on the jump
    occurrence.  Reaching the horizon in a non-terminal mode flags the
    returned timeline as horizon_exceeded instead of raising.  Statistics
    (ticks, jumps, out-of-order anomalies) land in timeline.stats.
    """
    rng = random.Random(f"{cfg.seed}")
    ruleset = rules or RuleSet()
    tl = Timeline()
    dt = cfg.dt_clock

    mode = automaton.modes[automaton.initial]
    vals0 = dict(automaton.initial_values)
    if mode.initial_values:
        vals0.update(mode.initial_values)
    state = AutomatonState(mode=mode.mode_id, values_at=(0.0, vals0),
                           flow=mode.flow_map(), now=0.0)

    jumps = 0
    anomalies = 0
    onset_tick: dict[str, int] = {}
    t_prev_now: float | None = None

    def record_tick(t: float) -> None:
        nonlocal t_prev_now
        opened = (("now", t),)
        closed = (("now", t_prev_now),) if t_prev_now is not None else ()
        if t_prev_now is not None:
            tl.clip_prop(("now", t_prev_now), t)
        tl.assert_prop(("now", t), t)
        vals = state_var_vals(state, t)
        tl.add_occurrence(t, ("clock-tick", t), CLASS_COMPUTATIONAL,
                          x=vals.get("x"), y=vals.get("y"), mode=state.mode,
                          opened=opened, closed=closed)
        t_prev_now = t

    def record_event(date: float, event: Term) -> None:
        applied = apply_effect_rules(tl, event, date, ruleset.effect_rules, rng)
        opened = [p for a in applied for p in a.opened]
        closed = [p for a in applied for p in a.closed]
        vals = state_var_vals(state, date)
        tl.add_occurrence(date, event, CLASS_PHYSICAL,
                          x=vals.get("x"), y=vals.get("y"), mode=state.mode,
                          opened=tuple(opened), closed=tuple(closed))

    n_ticks = int(math.floor(cfg.horizon / dt + 1e-9))
    for tick in range(n_ticks + 1):
        t = tick * dt
        record_tick(t)
        mode = automaton.modes[state.mode]
        if tick == n_ticks:
            break

        # within-tick candidates, processed in date order
        candidates: list[tuple[float, int, object]] = []
        vals_t = state_var_vals(state, t)
        store = _store_from(tl, t, vals_t)
        enabled = enabled_edges(mode, state, t, store)
        for edge in enabled:
            onset_tick.setdefault(edge.edge_id, tick)
        for edge in enabled:
            p = 1.0 - math.exp(-dt / cfg.tau_jump)
            if rng.random() < p:
                delay = _trunc_exp(dt, cfg.tau_jump, rng)
                candidates.append((t + delay, 0, edge))
        holding = tl.holding(t, "after")
        for rule in ruleset.exo_rules:
            solutions = solve_condition_over(rule.condition, holding)
            solutions.sort(key=lambda b: sorted(b.items()))
            for b in solutions:
                p = 1.0 - math.exp(-dt / rule.spacing)
                if rng.random() < p:
                    candidates.append((t + rng.random() * dt, 1,
                                       terms.substitute(rule.event, b)))
        candidates.sort(key=lambda c: (c[0], c[1]))

        jumped = False
        for date, kind, payload in candidates:
            if kind == 1:
                record_event(date, payload)
                continue
            if jumped:
                continue  # the mode was already left this tick
            edge = payload
            new_mode_id = sample_successor_mode(edge, rng, tl)
            new_mode = automaton.modes[new_mode_id]
            vals_jump = state_var_vals(state, date)
            if new_mode.initial_values:
                vals_jump = {**vals_jump, **new_mode.initial_values}
            jumps += 1
            if any(onset_tick.get(e.edge_id, tick) < onset_tick[edge.edge_id]
                   for e in enabled if e.edge_id != edge.edge_id):
                anomalies += 1
            tl.add_occurrence(
                date, ("jump", edge.edge_id), CLASS_PHYSICAL,
                x=vals_jump.get("x"), y=vals_jump.get("y"), mode=new_mode_id,
                opened=(("mode", new_mode_id), ("flow", new_mode_id)),
                closed=(("mode", state.mode), ("flow", state.mode)))
            tl.clip_prop(("mode", state.mode), date)
            tl.clip_prop(("flow", state.mode), date)
            tl.assert_prop(("mode", new_mode_id), date)
            tl.assert_prop(("flow", new_mode_id), date)
            state = AutomatonState(mode=new_mode_id, values_at=(date, vals_jump),
                                   flow=new_mode.flow_map(), now=date)
            onset_tick.clear()
            jumped = True

    tl.horizon_exceeded = bool(automaton.modes[state.mode].edges)
    tl.stats = {
        "ticks": n_ticks + 1,
        "jumps": jumps,
        "anomalies": anomalies,
        "anomaly_rate": (anomalies / jumps) if jumps else 0.0,
        "final_mode": state.mode,
    }
    return tl


def mode_sequence(tl: Timeline, initial: str) -> tuple[str, ...]:
    """The run's mode path: initial mode plus each jump's target."""
    seq = [initial]
    for occ in tl.occurrences:
        if occ.event and occ.event[0] == "jump":
            seq.append(occ.mode)
    return tuple(seq)


def mode_sequence_distribution(automaton: ModeGraph, rules: RuleSet | None,
                               cfg: RefConfig, n_runs: int,
                               seed_prefix: str = "ref") -> Counter:
    """Empirical distribution of mode sequences over n_runs projections."""
    counts: Counter = Counter()
    for i in range(n_runs):
        run_cfg = RefConfig(cfg.dt_clock, cfg.tau_jump, cfg.horizon,
                            seed=f"{seed_prefix}/{cfg.seed}/{i}")
        tl = project_clock_tick(automaton, rules, run_cfg)
        counts[mode_sequence(tl, automaton.initial)] += 1
    return counts


def total_variation(a: Counter, b: Counter) -> float:
    """Total variation distance between two empirical distributions."""
    na = sum(a.values())
    nb = sum(b.values())
    if na == 0 or nb == 0:
        raise DomainError("empty sample in total-variation computation")
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a[k] / na - b[k] / nb) for k in keys)


def anomaly_rate(automaton: ModeGraph, rules: RuleSet | None, cfg: RefConfig,
                 n_runs: int, seed_prefix: str = "anom") -> float:
    """Pooled out-of-order jump rate over n_runs projections."""
    jumps = 0
    anomalies = 0
    for i in range(n_runs):
        run_cfg = RefConfig(cfg.dt_clock, cfg.tau_jump, cfg.horizon,
                            seed=f"{seed_prefix}/{cfg.seed}/{i}")
        tl = project_clock_tick(automaton, rules, run_cfg)
        jumps += tl.stats["jumps"]
        anomalies += tl.stats["anomalies"]
    return (anomalies / jumps) if jumps else 0.0


def convergence_levels(automaton: ModeGraph, rules: RuleSet | None,
                       base_cfg: RefConfig, levels: int, n_runs: int,
                       reference_counts: Counter) -> list[tuple[int, float, float]]:
    """Per-level (level, TV distance to reference_counts, anomaly rate),
    halving dt_clock and tau_jump at each level."""
    rows = []
    for level in range(levels):
        scale = 0.5 ** level
        cfg = RefConfig(base_cfg.dt_clock * scale, base_cfg.tau_jump * scale,
                        base_cfg.horizon, seed=f"{base_cfg.seed}/L{level}")
        counts = mode_sequence_distribution(automaton, rules, cfg, n_runs,
                                            seed_prefix=f"lvl{level}")
        tv = total_variation(counts, reference_counts)
        rate = anomaly_rate(automaton, rules, cfg, max(1, n_runs // 10),
                            seed_prefix=f"anom{level}")
        rows.append((level, tv, rate))
    return rows
