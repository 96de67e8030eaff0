"""Shipped example inputs: the twelve-office floor plan and its plans.

The files under ``planproj/data`` are generated from the builders in
``courier``; ``fixture_payloads`` recomputes each file's exact text, so
a test can prove the shipped copies never drift from the code.  Use
``fixture_text`` for contents and ``fixture_path`` for a filesystem
path to hand to the command line.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .courier import (
    COURIER_RULES_TEXT,
    build_fixture_world,
    courier_beliefs,
    grand_tour_plan,
    initial_tour,
    revised_tour,
)
from .crp.printer import print_plan
from .worldmodel import beliefs_to_json, world_to_json

FIXTURE_NAMES = (
    "world.json",
    "beliefs.json",
    "courier.rules",
    "tour-initial.plan",
    "tour-revised.plan",
    "grand-tour.plan",
)


def _one_newline(text: str) -> str:
    return text.rstrip("\n") + "\n"


def fixture_payloads() -> dict[str, str]:
    """Every shipped file's text, regenerated from the courier builders."""
    world = build_fixture_world()
    return {
        "world.json": json.dumps(world_to_json(world), indent=2,
                                 sort_keys=True) + "\n",
        "beliefs.json": json.dumps(beliefs_to_json(courier_beliefs()),
                                   indent=2, sort_keys=True) + "\n",
        "courier.rules": _one_newline(COURIER_RULES_TEXT),
        "tour-initial.plan": _one_newline(initial_tour().to_plan_text()),
        "tour-revised.plan": _one_newline(revised_tour().to_plan_text()),
        "grand-tour.plan": _one_newline(print_plan(grand_tour_plan(world))),
    }


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"no fixture named {name!r}; have {FIXTURE_NAMES}")
    return (resources.files(__package__) / "data" / name).read_text(
        encoding="utf-8")


def fixture_path(name: str) -> Path:
    """Filesystem path of a shipped fixture (the package is installed
    as plain files, so resources resolve to real paths)."""
    if name not in FIXTURE_NAMES:
        raise KeyError(f"no fixture named {name!r}; have {FIXTURE_NAMES}")
    return Path(str(resources.files(__package__) / "data" / name))


def write_fixtures(dest_dir) -> None:
    """Regenerate every shipped file under ``dest_dir``."""
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    for name, text in fixture_payloads().items():
        (dest / name).write_text(text, encoding="utf-8")
