"""Temporal projection for concurrent reactive plans over hybrid automata.

The package projects seeded Monte-Carlo scenarios of concurrent reactive
plans running against a probabilistic hybrid world model, records each
scenario as a timeline of occurrences and occasions, and drives a
binomial flaw detector over sampled scenario batches.  The ``courier``
module ships a complete twelve-office delivery fixture exercising the
full stack; the ``cli`` module exposes the batch commands.
"""

__version__ = "0.1.0"

from .automaton import (
    AutomatonInvalid,
    ControlMode,
    JumpEdge,
    ModeGraph,
    SuccessorRange,
    make_mode,
    quantize_to_ranges,
    sample_successor_mode,
    validate_automaton,
)
from .courier import (
    AddOrdering,
    CycleIntroduced,
    DeliveryRequest,
    DropOpportunity,
    TourPlan,
    apply_revision_rule,
    build_fixture_world,
    classify_scenario,
    classify_scenarios,
    courier_beliefs,
    courier_requests,
    courier_rules,
    grand_tour_plan,
    grand_tour_requests,
    heuristic_schedule,
    initial_tour,
    revised_tour,
)
from .crp import (
    DeadlockDetected,
    Interpreter,
    PlanSyntaxError,
    parse_plan,
    print_plan,
)
from .errors import DomainError, Infeasible
from .flaw import (
    DetectorSpec,
    count_flaw,
    detect_flaw,
    detection_probability,
    flaw_report,
    required_sample_size,
    sample_scenarios,
)
from .fixtures import fixture_path, fixture_text
from .geom2d import AxisRect, Disk, HalfPlane, Point, Polyline, distance
from .projector import (
    HorizonExceeded,
    ProjectionError,
    ProjectorConfig,
    project_plan,
)
from .refproj import (
    RefConfig,
    choose_ref_parameters,
    mode_sequence,
    project_clock_tick,
    total_variation,
)
from .rules import FlawPredicate, RuleSet, load_rules
from .svgplot import count_glyphs, render_timeline_svg
from .timeline import Occasion, Occurrence, Timeline, timeline_from_jsonl
from .worldmodel import (
    BeliefState,
    Door,
    World,
    WorldError,
    beliefs_from_json,
    beliefs_to_json,
    default_beliefs,
    load_beliefs,
    load_world,
    merge_beliefs,
    world_from_json,
    world_to_json,
)

__all__ = [
    "AddOrdering", "AutomatonInvalid", "AxisRect", "BeliefState",
    "ControlMode", "CycleIntroduced", "DeadlockDetected", "DeliveryRequest",
    "DetectorSpec", "Disk", "DomainError", "Door", "DropOpportunity",
    "FlawPredicate", "HalfPlane", "HorizonExceeded", "Infeasible",
    "Interpreter", "JumpEdge", "ModeGraph", "Occasion", "Occurrence",
    "PlanSyntaxError", "Point", "Polyline", "ProjectionError",
    "ProjectorConfig", "RefConfig", "RuleSet", "SuccessorRange", "Timeline",
    "TourPlan", "World", "WorldError",
    "apply_revision_rule", "beliefs_from_json", "beliefs_to_json",
    "build_fixture_world", "choose_ref_parameters", "classify_scenario",
    "classify_scenarios", "count_flaw", "count_glyphs", "courier_beliefs",
    "courier_requests", "courier_rules", "default_beliefs",
    "detect_flaw", "detection_probability", "distance", "fixture_path",
    "fixture_text", "flaw_report", "grand_tour_plan", "grand_tour_requests",
    "heuristic_schedule", "initial_tour", "load_beliefs", "load_rules",
    "load_world", "make_mode", "merge_beliefs", "mode_sequence",
    "parse_plan", "print_plan", "project_clock_tick", "project_plan",
    "quantize_to_ranges", "render_timeline_svg", "required_sample_size",
    "revised_tour", "sample_scenarios", "sample_successor_mode",
    "timeline_from_jsonl", "total_variation", "validate_automaton",
    "world_from_json", "world_to_json",
]
