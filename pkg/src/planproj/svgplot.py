"""Trajectory plots as standalone SVG.

A plot shows the floor plan (rooms, doors, waypoints), the robot's
trajectory threaded through the positions of the recorded occurrences,
and one glyph per notable event:

    rhombus        travel-mode change
    circle         door passing (start or finish)
    square         region transition (a passive sensor update)
    double circle  navigation start or stop

Every glyph is a single SVG element (the double circle is a group)
carrying ``class="glyph <kind>"``, so a plot can be audited by parsing:
``count_glyphs`` returns the per-kind totals straight from the markup.
The renderer is a pure function of its inputs; equal timelines and
worlds produce byte-equal documents.
"""

from __future__ import annotations

from xml.etree import ElementTree

from .geom2d import AxisRect, Point
from .timeline import Timeline
from .worldmodel import World

GLYPH_MODE_CHANGE = "mode-change"
GLYPH_DOOR_PASSING = "door-passing"
GLYPH_REGION_TRANSITION = "region-transition"
GLYPH_NAV_ENDPOINT = "nav-endpoint"

_PAD = 40.0


def glyph_kind(event) -> str | None:
    """The glyph kind an occurrence event earns, or None for no glyph."""
    if not isinstance(event, tuple) or not event:
        return None
    head = event[0]
    if head == "set-travel-mode":
        return GLYPH_MODE_CHANGE
    if head in ("start-passing-door", "finish-passing-door"):
        return GLYPH_DOOR_PASSING
    if head == "passive-sensor-update":
        return GLYPH_REGION_TRANSITION
    if head in ("begin", "end") and len(event) > 1 \
            and isinstance(event[1], tuple) and event[1] \
            and event[1][0] == "follow-path":
        return GLYPH_NAV_ENDPOINT
    return None


def _fmt(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _world_bbox(world: World, extra: list[Point]) -> tuple[float, float, float, float]:
    xs: list[float] = []
    ys: list[float] = []
    for rect in world.rooms.values():
        xs.extend((rect.xmin, rect.xmax))
        ys.extend((rect.ymin, rect.ymax))
    for _, region in world.mode_regions:
        if isinstance(region, AxisRect):
            xs.extend((region.xmin, region.xmax))
            ys.extend((region.ymin, region.ymax))
    for wp in world.waypoints.values():
        xs.append(wp.point.x)
        ys.append(wp.point.y)
    for p in world.locations.values():
        xs.append(p.x)
        ys.append(p.y)
    for p in extra:
        xs.append(p.x)
        ys.append(p.y)
    if not xs:
        xs, ys = [0.0, 100.0], [0.0, 100.0]
    return min(xs), max(xs), min(ys), max(ys)


class _Canvas:
    """Maps world coordinates (y up) onto SVG coordinates (y down)."""

    def __init__(self, bbox):
        self.xmin, self.xmax, self.ymin, self.ymax = bbox
        self.width = self.xmax - self.xmin + 2.0 * _PAD
        self.height = self.ymax - self.ymin + 2.0 * _PAD

    def x(self, v: float) -> float:
        return v - self.xmin + _PAD

    def y(self, v: float) -> float:
        return self.ymax - v + _PAD


def _rect_elem(canvas: _Canvas, rect: AxisRect, css: str, name: str) -> str:
    x, y = canvas.x(rect.xmin), canvas.y(rect.ymax)
    w, h = rect.xmax - rect.xmin, rect.ymax - rect.ymin
    return (f'<rect class="{css}" data-name="{name}" x="{_fmt(x)}" y="{_fmt(y)}" '
            f'width="{_fmt(w)}" height="{_fmt(h)}"/>')


def _glyph_elem(kind: str, x: float, y: float, date: float) -> str:
    tag = f'class="glyph {kind}" data-date="{_fmt(date)}"'
    if kind == GLYPH_MODE_CHANGE:
        s = 9.0
        pts = ((x, y - s), (x + s, y), (x, y + s), (x - s, y))
        joined = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in pts)
        return (f'<polygon {tag} points="{joined}" fill="#c2571f" '
                f'stroke="#7a3512" stroke-width="1"/>')
    if kind == GLYPH_DOOR_PASSING:
        return (f'<circle {tag} cx="{_fmt(x)}" cy="{_fmt(y)}" r="6.5" '
                f'fill="none" stroke="#3d7a37" stroke-width="2.5"/>')
    if kind == GLYPH_REGION_TRANSITION:
        return (f'<rect {tag} x="{_fmt(x - 6)}" y="{_fmt(y - 6)}" '
                f'width="12" height="12" fill="#8a4f9e" stroke="#5a3168" '
                f'stroke-width="1"/>')
    if kind == GLYPH_NAV_ENDPOINT:
        return (f'<g {tag}>'
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="8" fill="none" '
                f'stroke="#14506e" stroke-width="1.8"/>'
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.5" fill="none" '
                f'stroke="#14506e" stroke-width="1.8"/>'
                f'</g>')
    raise ValueError(f"unknown glyph kind {kind!r}")


def render_timeline_svg(tl: Timeline, world: World) -> str:
    """The SVG document for a projection record over a floor plan."""
    track: list[Point] = []
    for occ in tl.occurrences:
        if occ.x is None or occ.y is None:
            continue
        p = Point(occ.x, occ.y)
        if not track or (abs(track[-1].x - p.x) > 1e-9
                         or abs(track[-1].y - p.y) > 1e-9):
            track.append(p)
    canvas = _Canvas(_world_bbox(world, track))

    parts: list[str] = []
    parts.append(f'<svg xmlns="http://www.w3.org/2000/svg" '
                 f'viewBox="0 0 {_fmt(canvas.width)} {_fmt(canvas.height)}">')
    parts.append(f'<rect class="backdrop" x="0" y="0" '
                 f'width="{_fmt(canvas.width)}" height="{_fmt(canvas.height)}" '
                 f'fill="#fbfaf7"/>')

    parts.append('<g class="world" fill="#f1ede3" stroke="#6b6257" '
                 'stroke-width="2">')
    for mode, region in world.mode_regions:
        if isinstance(region, AxisRect):
            parts.append(_rect_elem(canvas, region, "mode-band", mode))
    for name in sorted(world.rooms):
        parts.append(_rect_elem(canvas, world.rooms[name], "room", name))
    for name in sorted(world.doors):
        door = world.doors[name]
        parts.append(f'<circle class="door" data-name="{name}" '
                     f'cx="{_fmt(canvas.x(door.center.x))}" '
                     f'cy="{_fmt(canvas.y(door.center.y))}" '
                     f'r="{_fmt(door.radius)}" fill="#ffffff" '
                     f'stroke="#998f7f" stroke-width="1.5"/>')
    for name in sorted(world.waypoints):
        wp = world.waypoints[name]
        parts.append(f'<circle class="waypoint" data-name="{name}" '
                     f'cx="{_fmt(canvas.x(wp.point.x))}" '
                     f'cy="{_fmt(canvas.y(wp.point.y))}" r="3" '
                     f'fill="#b5ab9a" stroke="none"/>')
    parts.append('</g>')

    if len(track) >= 2:
        joined = " ".join(
            f"{_fmt(canvas.x(p.x))},{_fmt(canvas.y(p.y))}" for p in track)
        parts.append(f'<polyline class="trajectory" points="{joined}" '
                     f'fill="none" stroke="#1f6f8b" stroke-width="3" '
                     f'stroke-linejoin="round"/>')

    glyphs: list[str] = []
    for occ in tl.occurrences:
        kind = glyph_kind(occ.event)
        if kind is None or occ.x is None or occ.y is None:
            continue
        glyphs.append(_glyph_elem(kind, canvas.x(occ.x), canvas.y(occ.y),
                                  occ.date))
    if glyphs:
        parts.append('<g class="events">')
        parts.extend(glyphs)
        parts.append('</g>')

    parts.append('</svg>')
    return "\n".join(parts) + "\n"


def count_glyphs(svg_text: str) -> dict[str, int]:
    """Per-kind glyph totals parsed back out of a rendered document."""
    root = ElementTree.fromstring(svg_text)
    counts: dict[str, int] = {}
    for elem in root.iter():
        css = elem.get("class", "")
        if css.startswith("glyph "):
            kind = css[len("glyph "):]
            counts[kind] = counts.get(kind, 0) + 1
    return counts
