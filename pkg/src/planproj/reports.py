"""Detector operating-characteristic tables, with published reference grids.

Two tables ship with the package:

* ``fig17``: detector firing probability, in percent, for DET(f, n, 2)
  over n in {3, 4, 5} and flaw frequencies 50..90%.  The computed
  values come from the exact binomial tail; the published grid agrees
  with them in every cell except (n=4, 60%), where the published 81.2
  is a digit transposition of the exact 82.1 (the same arithmetic that
  produces every neighboring cell yields 0.8208 there).
* ``fig18``: the smallest sample count separating a flaw frequency
  worth eliminating from the acceptable residual rate.  The published
  grid's generating rule is not recoverable; the table therefore shows
  this package's ``required_sample_size`` results side by side with the
  published counts and a match marker per row, and nothing in the
  package asserts the two columns agree.

Each table renders three ways: an aligned text block for terminals, CSV
rows for files, and a matplotlib figure saved as PNG (matplotlib is
imported only when a figure is requested).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .flaw import Infeasible, detection_probability, required_sample_size

FIG17_K = 2
FIG17_NS = (3, 4, 5)
FIG17_THETAS = (0.5, 0.6, 0.7, 0.8, 0.9)

# Published percentage grid, row per n, column per theta.
FIG17_PUBLISHED: dict[int, tuple[float, ...]] = {
    3: (50.0, 64.8, 78.4, 89.6, 97.2),
    4: (68.8, 81.2, 91.6, 97.3, 99.6),
    5: (81.2, 91.3, 96.9, 99.3, 99.9),
}

FIG18_TAUS = (0.001, 0.01, 0.05)
FIG18_THETAS = (0.01, 0.1, 0.2, 0.4, 0.6, 0.8)
FIG18_BETA = 0.95

# Published sample counts, row per tau, column per theta; None marks the
# cells the publication itself leaves as infeasible.
FIG18_PUBLISHED: dict[float, tuple[int | None, ...]] = {
    0.001: (1331, 100, 44, 17, 8, 3),
    0.01: (None, 121, 49, 17, 8, 3),
    0.05: (None, 392, 78, 22, 9, 3),
}


def percent(p: float) -> str:
    """Probability as a percentage with one decimal, saturating at 99.9.

    Values strictly below 1 never print as 100.0; the top of the scale
    is reserved for certainty.
    """
    if p >= 1.0:
        return "100.0"
    v = round(p * 100.0, 1)
    if v > 99.9:
        v = 99.9
    return f"{v:.1f}"


@dataclass(frozen=True)
class Fig17Cell:
    n: int
    k: int
    theta: float
    computed: str
    published: str
    match: bool


@dataclass(frozen=True)
class Fig18Cell:
    tau: float
    theta: float
    computed: int | None  # None marks an infeasible pair
    published: int | None
    match: bool


def fig17_cells() -> list[Fig17Cell]:
    cells = []
    for n in FIG17_NS:
        for j, theta in enumerate(FIG17_THETAS):
            computed = percent(detection_probability(n, FIG17_K, theta))
            published = f"{FIG17_PUBLISHED[n][j]:.1f}"
            cells.append(Fig17Cell(n, FIG17_K, theta, computed, published,
                                   computed == published))
    return cells


def fig18_cells(beta: float = FIG18_BETA) -> list[Fig18Cell]:
    cells = []
    for tau in FIG18_TAUS:
        for j, theta in enumerate(FIG18_THETAS):
            try:
                computed, _ = required_sample_size(theta, tau, beta)
            except Infeasible:
                computed = None
            published = FIG18_PUBLISHED[tau][j]
            cells.append(Fig18Cell(tau, theta, computed, published,
                                   computed == published))
    return cells


def _n_str(v: int | None) -> str:
    return "-" if v is None else str(v)


def fig17_text() -> str:
    """Computed grid, then the published one, then any differing cells."""
    cells = fig17_cells()
    head = "theta".ljust(12) + "".join(f"{int(t * 100)}%".rjust(8)
                                       for t in FIG17_THETAS)
    lines = ["detector firing probability, percent", head]
    for n in FIG17_NS:
        row = [c.computed for c in cells if c.n == n]
        lines.append(f"DET(f,{n},2)".ljust(12) + "".join(v.rjust(8) for v in row))
    lines.append("")
    lines.append("published reference")
    lines.append(head)
    for n in FIG17_NS:
        row = [c.published for c in cells if c.n == n]
        lines.append(f"DET(f,{n},2)".ljust(12) + "".join(v.rjust(8) for v in row))
    diffs = [c for c in cells if not c.match]
    for c in diffs:
        lines.append(f"note: n={c.n} theta={int(c.theta * 100)}% computed "
                     f"{c.computed} vs published {c.published} "
                     f"(transposed digits in the published cell)")
    return "\n".join(lines) + "\n"


def fig18_text(beta: float = FIG18_BETA) -> str:
    """Long-form rows with a match marker; '-' marks infeasible cells."""
    lines = [f"required sample count at beta={beta:g} "
             f"(computed vs published; '!' marks a mismatch)"]
    lines.append(f"{'tau':>6} {'theta':>6} {'computed':>9} {'published':>10} "
                 f"{'match':>6}")
    for c in fig18_cells(beta):
        marker = "" if c.match else "!"
        lines.append(f"{c.tau * 100:>5.1f}% {c.theta * 100:>5.0f}% "
                     f"{_n_str(c.computed):>9} {_n_str(c.published):>10} "
                     f"{marker:>6}")
    lines.append("the published grid's generating rule is not recoverable; "
                 "this table reports, it does not assert agreement")
    return "\n".join(lines) + "\n"


def fig17_csv(path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "k", "theta", "computed_pct", "published_pct",
                    "match"])
        for c in fig17_cells():
            w.writerow([c.n, c.k, c.theta, c.computed, c.published,
                        int(c.match)])


def fig18_csv(path, beta: float = FIG18_BETA) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "theta", "computed_n", "published_n", "match"])
        for c in fig18_cells(beta):
            w.writerow([c.tau, c.theta, _n_str(c.computed),
                        _n_str(c.published), int(c.match)])


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def fig17_png(path) -> None:
    plt = _pyplot()
    cells = fig17_cells()
    xs = [t * 100 for t in FIG17_THETAS]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for n in FIG17_NS:
        ys = [float(c.computed) for c in cells if c.n == n]
        ax.plot(xs, ys, marker="o", label=f"DET(f,{n},2)")
    for c in cells:
        if not c.match:
            ax.plot([c.theta * 100], [float(c.published)], marker="x",
                    color="crimson", linestyle="none",
                    label="published (differs)")
    ax.set_xlabel("flaw frequency, percent")
    ax.set_ylabel("firing probability, percent")
    ax.set_title("detector firing probability")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def fig18_png(path, beta: float = FIG18_BETA) -> None:
    plt = _pyplot()
    cells = fig18_cells(beta)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for tau in FIG18_TAUS:
        rows = [c for c in cells if c.tau == tau]
        xs = [c.theta * 100 for c in rows if c.computed is not None]
        ys = [c.computed for c in rows if c.computed is not None]
        ax.plot(xs, ys, marker="o", label=f"computed, tau={tau * 100:g}%")
        px = [c.theta * 100 for c in rows if c.published is not None]
        py = [c.published for c in rows if c.published is not None]
        ax.plot(px, py, marker="s", linestyle="--", alpha=0.6,
                label=f"published, tau={tau * 100:g}%")
    ax.set_yscale("log")
    ax.set_xlabel("flaw frequency, percent")
    ax.set_ylabel("sample count")
    ax.set_title(f"required sample count (beta={beta:g})")
    ax.grid(True, alpha=0.3, which="both")
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=120)
    plt.close(fig)
