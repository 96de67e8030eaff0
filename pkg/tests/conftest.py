"""Shared fixtures: the courier floor, a small two-room world, a CLI
runner, and the acceptance-criteria verdict collector."""

import pytest

from planproj import courier
from planproj.fixtures import write_fixtures
from planproj.geom2d import AxisRect, Disk, Point
from planproj.worldmodel import Door, Waypoint, World, WorldObject


def make_door_world(d1_open: float = 1.0, d2_open: float = 0.0,
                    mode_variants: dict | None = None) -> World:
    """Two offices joined by a short hallway, one door each.

    Geometry is chosen so a straight run from the start point to the
    hallway waypoint w1 crosses the d-1 doorway disk (arclength 60 to
    140) and enters the hallway band (arclength 140 onward).
    """
    hall = AxisRect(0, 1000, 200, 300)
    return World(
        speeds={"office": 30.0, "doorway": 20.0, "hallway": 80.0},
        rooms={"a-1": AxisRect(0, 400, 0, 200),
               "a-2": AxisRect(600, 1000, 0, 200)},
        doors={"d-1": Door("d-1", Point(200, 200), 40.0, ("a-1", "hallway"),
                           open_probability=d1_open),
               "d-2": Door("d-2", Point(800, 200), 40.0, ("a-2", "hallway"),
                           open_probability=d2_open)},
        waypoints={"w1": Waypoint("w1", Point(200, 250)),
                   "w2": Waypoint("w2", Point(800, 250))},
        edges=[("w1", "w2")],
        locations={"start": Point(200, 100), "desk": Point(800, 100)},
        triggers={},
        mode_regions=[("doorway", Disk(Point(200, 200), 40.0)),
                      ("doorway", Disk(Point(800, 200), 40.0)),
                      ("hallway", hall)],
        default_mode="office",
        mode_variants=dict(mode_variants or {}),
        objects={"let-1": WorldObject("let-1", Point(820, 110),
                                      kind="letter", color="red")},
    )


@pytest.fixture
def door_world() -> World:
    return make_door_world()


@pytest.fixture(scope="session")
def courier_world() -> World:
    return courier.build_fixture_world()


@pytest.fixture(scope="session")
def courier_ruleset():
    return courier.courier_rules()


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    """The packaged data files, written out for CLI invocations."""
    d = tmp_path_factory.mktemp("fixtures")
    write_fixtures(d)
    return d


@pytest.fixture
def run_cli(capsys):
    """Invoke the command line in-process; returns (code, stdout, stderr)."""
    from planproj.cli import main

    def run(*argv: str):
        code = main([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run


# --- acceptance verdict collection ------------------------------------------------

_CRITERION_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the line is echoed in the summary."""

    def record(num: int, label: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        line = f"criterion {num:02d} [{status}] {label}"
        if detail:
            line += f" :: {detail}"
        _CRITERION_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)
