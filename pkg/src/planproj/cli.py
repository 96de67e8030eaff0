"""Command-line surface: validate inputs, project, sample, detect, table, plot.

Subcommands:

    validate   parse the given plan/world/beliefs/rules files and report
    project    one seeded projection -> timeline JSONL plus a summary line
    sample     n seeded projections -> one JSON summary line per scenario
    detect     Monte-Carlo flaw detector -> JSON report, decision exit code
    tables     fig17 / fig18 operating-characteristic tables (CSV/PNG opt.)
    plot       timeline JSONL + world -> trajectory SVG

Exit codes: 0 success (for detect: flaw not confirmed), 1 unusable input
(missing or unparsable file, unknown flaw name), 2 projection error
(horizon overrun, interpreter deadlock), 3 detect confirmed the flaw.
Every command writes deterministic bytes for fixed inputs and seed; no
timestamps or environment state leak into any output file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import reports
from .crp import DeadlockDetected, PlanSyntaxError, parse_plan
from .errors import DomainError, Infeasible
from .flaw import DEFAULT_HORIZON, DetectorSpec, count_flaw, flaw_report, \
    sample_scenarios
from .projector import HorizonExceeded, ProjectionError, project_plan
from .rules import ContradictoryEffects, RuleSet, load_rules
from .sexpr import SexprError
from .svgplot import render_timeline_svg
from .timeline import timeline_from_jsonl
from .worldmodel import BeliefState, World, WorldError, beliefs_from_json, \
    world_from_json


class CliError(Exception):
    """Input problem: report to stderr, exit 1."""


_PARSE_ERRORS = (SexprError, PlanSyntaxError, WorldError, DomainError,
                 ContradictoryEffects, json.JSONDecodeError, ValueError,
                 KeyError, TypeError)


def _read_text(path: str, kind: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise CliError(f"cannot read {kind} file {path}: {err}") from None


def _load_plan(path: str):
    text = _read_text(path, "plan")
    try:
        return parse_plan(text)
    except _PARSE_ERRORS as err:
        raise CliError(f"bad plan file {path}: {err}") from None


def _load_world(path: str) -> World:
    text = _read_text(path, "world")
    try:
        return world_from_json(json.loads(text))
    except _PARSE_ERRORS as err:
        raise CliError(f"bad world file {path}: {err}") from None


def _load_beliefs(path: str) -> BeliefState:
    text = _read_text(path, "beliefs")
    try:
        return beliefs_from_json(json.loads(text))
    except _PARSE_ERRORS as err:
        raise CliError(f"bad beliefs file {path}: {err}") from None


def _load_rules(path: str) -> RuleSet:
    text = _read_text(path, "rules")
    try:
        return load_rules(text)
    except _PARSE_ERRORS as err:
        raise CliError(f"bad rules file {path}: {err}") from None


def _seed(raw: str):
    try:
        return int(raw)
    except ValueError:
        return raw


@dataclass(frozen=True)
class RunManifest:
    """The file and parameter bundle one projection run needs."""

    plan_path: str
    world_path: str
    beliefs_path: str | None
    rules_path: str | None
    seed: object
    horizon: float
    out_path: str | None

    def load(self):
        plan = _load_plan(self.plan_path)
        world = _load_world(self.world_path)
        beliefs = _load_beliefs(self.beliefs_path) if self.beliefs_path else None
        rules = _load_rules(self.rules_path) if self.rules_path else RuleSet()
        return plan, world, beliefs, rules


def _manifest(args) -> RunManifest:
    return RunManifest(
        plan_path=args.plan, world_path=args.world,
        beliefs_path=args.beliefs, rules_path=args.rules,
        seed=_seed(args.seed), horizon=args.horizon,
        out_path=getattr(args, "out", None))


def cmd_validate(args) -> int:
    checks = []
    if args.plan:
        checks.append(("plan", args.plan, _load_plan))
    if args.world:
        checks.append(("world", args.world, _load_world))
    if args.beliefs:
        checks.append(("beliefs", args.beliefs, _load_beliefs))
    if args.rules:
        checks.append(("rules", args.rules, _load_rules))
    if not checks:
        raise CliError("nothing to validate; give at least one of "
                       "--plan/--world/--beliefs/--rules")
    failed = False
    for kind, path, loader in checks:
        try:
            loader(path)
            print(f"{path}: {kind} ok")
        except CliError as err:
            failed = True
            print(f"{err}", file=sys.stderr)
    return 1 if failed else 0


def cmd_project(manifest: RunManifest) -> int:
    plan, world, beliefs, rules = manifest.load()
    if manifest.out_path is None:
        raise CliError("project needs --out for the timeline JSONL")
    try:
        tl = project_plan(plan, world, beliefs, rules, manifest.seed,
                          manifest.horizon)
        final_state = "completed"
        code = 0
    except HorizonExceeded as err:
        tl = err.timeline
        final_state = "horizon-exceeded"
        code = 2
    Path(manifest.out_path).write_text(tl.to_jsonl(), encoding="utf-8")
    stats = tl.stats or {}
    print(f"events {stats.get('events', len(tl.occurrences))} "
          f"reschedules {stats.get('reschedules', 0)} "
          f"final-state {final_state}")
    if code:
        print(f"projection error: plan still running at horizon "
              f"{manifest.horizon:g}", file=sys.stderr)
    return code


def cmd_sample(manifest: RunManifest, n: int, flaw_name: str | None) -> int:
    plan, world, beliefs, rules = manifest.load()
    if manifest.out_path is None:
        raise CliError("sample needs --out for the scenario summaries")
    flaw = None
    if flaw_name is not None:
        flaw = rules.flaws.get(flaw_name)
        if flaw is None:
            raise CliError(f"unknown flaw {flaw_name!r}; rules define "
                           f"{sorted(rules.flaws) or 'none'}")
    scenarios = sample_scenarios(plan, world, beliefs, rules, n,
                                 manifest.seed, manifest.horizon)
    lines = []
    hits = 0
    for i, tl in enumerate(scenarios):
        stats = tl.stats or {}
        rec = {
            "scenario": i,
            "seed": f"{manifest.seed}/{i}",
            "events": stats.get("events", len(tl.occurrences)),
            "reschedules": stats.get("reschedules", 0),
            "horizon_exceeded": tl.horizon_exceeded,
            "error": stats.get("error"),
        }
        if flaw is not None:
            rec["flaw"] = flaw.name
            rec["holds"] = flaw.holds(tl)
            hits += rec["holds"]
        lines.append(json.dumps(rec, sort_keys=True))
    Path(manifest.out_path).write_text("\n".join(lines) + "\n",
                                       encoding="utf-8")
    tail = f" flaw-count {hits}" if flaw is not None else ""
    print(f"scenarios {n}{tail}")
    return 0


def cmd_detect(manifest: RunManifest, flaw_name: str, n: int, k: int,
               theta: float, tau: float) -> int:
    plan, world, beliefs, rules = manifest.load()
    if manifest.out_path is None:
        raise CliError("detect needs --out for the JSON report")
    flaw = rules.flaws.get(flaw_name)
    if flaw is None:
        raise CliError(f"unknown flaw {flaw_name!r}; rules define "
                       f"{sorted(rules.flaws) or 'none'}")
    try:
        spec = DetectorSpec(n=n, k=k, theta=theta, tau=tau)
    except DomainError as err:
        raise CliError(str(err)) from None
    scenarios = sample_scenarios(plan, world, beliefs, rules, n,
                                 manifest.seed, manifest.horizon)
    report = flaw_report(scenarios, flaw, spec)
    report["seed"] = str(manifest.seed)
    report["horizon"] = manifest.horizon
    Path(manifest.out_path).write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(f"flaw {flaw.name} count {report['count']}/{n} "
          f"decision {'eliminate' if report['decision'] else 'keep'}")
    return 3 if report["decision"] else 0


def cmd_tables(which: str, out_dir: str | None) -> int:
    if which == "fig17":
        text, csv_fn, png_fn = reports.fig17_text(), reports.fig17_csv, \
            reports.fig17_png
    else:
        text, csv_fn, png_fn = reports.fig18_text(), reports.fig18_csv, \
            reports.fig18_png
    print(text, end="")
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_fn(out / f"{which}.csv")
        png_fn(out / f"{which}.png")
        print(f"wrote {out / (which + '.csv')} and {out / (which + '.png')}")
    return 0


def cmd_plot(timeline_path: str, world_path: str, out_path: str) -> int:
    text = _read_text(timeline_path, "timeline")
    try:
        tl = timeline_from_jsonl(text)
    except _PARSE_ERRORS as err:
        raise CliError(f"bad timeline file {timeline_path}: {err}") from None
    world = _load_world(world_path)
    Path(out_path).write_text(render_timeline_svg(tl, world),
                              encoding="utf-8")
    print(f"wrote {out_path}")
    return 0


def _common_run_flags(p: argparse.ArgumentParser, out_help: str) -> None:
    p.add_argument("--plan", required=True, help="plan file (s-expression)")
    p.add_argument("--world", required=True, help="world file (JSON)")
    p.add_argument("--beliefs", help="belief file (JSON); defaults derive "
                                     "from the world's doors and objects")
    p.add_argument("--rules", help="rule file (s-expression)")
    p.add_argument("--seed", default="0", help="root random seed")
    p.add_argument("--horizon", type=float, default=DEFAULT_HORIZON,
                   help=f"projection horizon, seconds "
                        f"(default {DEFAULT_HORIZON:g})")
    p.add_argument("--out", required=True, help=out_help)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="planproj",
        description="Temporal projection of concurrent reactive plans.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse input files and report")
    p.add_argument("--plan")
    p.add_argument("--world")
    p.add_argument("--beliefs")
    p.add_argument("--rules")

    p = sub.add_parser("project", help="one seeded projection to JSONL")
    _common_run_flags(p, "timeline JSONL output path")

    p = sub.add_parser("sample", help="n seeded projections, one summary "
                                      "line each")
    _common_run_flags(p, "scenario summary JSONL output path")
    p.add_argument("--n", type=int, required=True, help="scenario count")
    p.add_argument("--flaw", help="also evaluate this flaw per scenario")

    p = sub.add_parser("detect", help="Monte-Carlo flaw detector")
    _common_run_flags(p, "JSON report output path")
    p.add_argument("--flaw", required=True, help="flaw name from the rules")
    p.add_argument("--n", type=int, required=True, help="scenario count")
    p.add_argument("--k", type=int, required=True, help="firing threshold")
    p.add_argument("--theta", type=float, default=0.5,
                   help="eliminate threshold (default 0.5)")
    p.add_argument("--tau", type=float, default=0.05,
                   help="ignore threshold (default 0.05)")

    p = sub.add_parser("tables", help="operating-characteristic tables")
    p.add_argument("which", choices=("fig17", "fig18"))
    p.add_argument("--out", help="directory for CSV and PNG copies")

    p = sub.add_parser("plot", help="trajectory SVG from timeline JSONL")
    p.add_argument("timeline", help="timeline JSONL path")
    p.add_argument("--world", required=True, help="world file (JSON)")
    p.add_argument("--out", required=True, help="SVG output path")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "project":
            return cmd_project(_manifest(args))
        if args.command == "sample":
            return cmd_sample(_manifest(args), args.n, args.flaw)
        if args.command == "detect":
            return cmd_detect(_manifest(args), args.flaw, args.n, args.k,
                              args.theta, args.tau)
        if args.command == "tables":
            return cmd_tables(args.which, args.out)
        if args.command == "plot":
            return cmd_plot(args.timeline, args.world, args.out)
        raise CliError(f"unknown command {args.command!r}")
    except CliError as err:
        print(f"planproj: {err}", file=sys.stderr)
        return 1
    except (ProjectionError, DeadlockDetected, HorizonExceeded,
            ContradictoryEffects) as err:
        print(f"planproj: projection error: {err}", file=sys.stderr)
        return 2
    except Infeasible as err:
        print(f"planproj: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
