"""Plot-ready tables and delimited output for the analysis pipeline.

Everything here is data, not graphics: the boxplot summaries and series
files carry exactly the numbers a plotting tool needs.  All writers are
deterministic (stable ordering, shortest-roundtrip float formatting) and
atomic (write to a temp file, then rename into place).
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .calibration import ScaleFactor
from .matches import DataFormatError
from .rolling import CLASS_ORDER, AttendanceClass, HomeAdvEstimate
from .stats import BasicStats, ClassComparison

ESTIMATE_COLUMNS = (
    "league",
    "season",
    "end_matchweek",
    "class",
    "home_adv_raw",
    "home_adv_win_units",
    "n_matches",
)
BOXPLOT_COLUMNS = ("league", "class", "min", "q1", "median", "q3", "max", "n")
TEST_COLUMNS = ("scope", "sample_x", "sample_y", "n_x", "n_y", "p_value", "z_value", "rank_sum")
BASIC_STATS_COLUMNS = ("league", "period", "goals_diff_per_match", "win_ratio_diff", "n_matches")


@dataclass(frozen=True)
class BoxplotSummary:
    """Five-number summary of one league x attendance-class group."""

    league: str
    attendance_class: AttendanceClass
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    n: int

    def __post_init__(self):
        if not self.minimum <= self.q1 <= self.median <= self.q3 <= self.maximum:
            raise ValueError("quartiles out of order")


def emit_boxplot_data(estimates: Sequence[HomeAdvEstimate]) -> list[BoxplotSummary]:
    """One five-number summary per (league, class) group, quartiles by
    midpoint interpolation; empty groups are skipped."""
    if not estimates:
        raise ValueError("no estimates to summarize")
    leagues = sorted({e.league for e in estimates})
    out = []
    for league in leagues:
        for cls in CLASS_ORDER:
            values = [
                e.home_adv_win_units
                for e in estimates
                if e.league == league and e.attendance_class is cls
            ]
            if not values:
                continue
            lo, q1, med, q3, hi = np.percentile(
                values, [0, 25, 50, 75, 100], method="midpoint"
            )
            out.append(
                BoxplotSummary(
                    league=league,
                    attendance_class=cls,
                    minimum=float(lo),
                    q1=float(q1),
                    median=float(med),
                    q3=float(q3),
                    maximum=float(hi),
                    n=len(values),
                )
            )
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_atomic(path: str | Path, text: str) -> Path:
    """Write text to path via a same-directory temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def estimates_csv(estimates: Sequence[HomeAdvEstimate]) -> str:
    return _csv(
        ESTIMATE_COLUMNS,
        (
            (
                e.league,
                e.season,
                e.end_matchweek,
                e.attendance_class.value,
                e.home_adv_raw,
                e.home_adv_win_units,
                e.n_matches,
            )
            for e in estimates
        ),
    )


def read_estimates_csv(source: str | Path | TextIO) -> list[HomeAdvEstimate]:
    """Parse a series file written by ``estimates_csv``."""
    own = isinstance(source, (str, Path))
    fh = open(source, "r", encoding="utf-8") if own else source
    try:
        header = fh.readline().rstrip("\r\n")
        if tuple(header.split(",")) != ESTIMATE_COLUMNS:
            raise DataFormatError(
                f"unexpected header {header!r}; expected {','.join(ESTIMATE_COLUMNS)}",
                line=1,
            )
        classes = {c.value: c for c in AttendanceClass}
        out = []
        for lineno, line in enumerate(fh, start=2):
            if line.strip() == "":
                continue
            cells = line.rstrip("\r\n").split(",")
            if len(cells) != len(ESTIMATE_COLUMNS):
                raise DataFormatError(
                    f"expected {len(ESTIMATE_COLUMNS)} columns, got {len(cells)}", lineno
                )
            league, season, end_mw, cls, raw, win, n = cells
            if cls not in classes:
                raise DataFormatError(f"unknown attendance class {cls!r}", lineno)
            try:
                out.append(
                    HomeAdvEstimate(
                        league=league,
                        season=season,
                        end_matchweek=int(end_mw),
                        home_adv_raw=float(raw),
                        home_adv_win_units=float(win),
                        attendance_class=classes[cls],
                        n_matches=int(n),
                    )
                )
            except ValueError as exc:
                raise DataFormatError(str(exc), lineno) from None
        if not out:
            raise DataFormatError("estimates file contains no data rows")
        return out
    finally:
        if own:
            fh.close()


def boxplot_csv(summaries: Sequence[BoxplotSummary]) -> str:
    return _csv(
        BOXPLOT_COLUMNS,
        (
            (
                s.league,
                s.attendance_class.value,
                s.minimum,
                s.q1,
                s.median,
                s.q3,
                s.maximum,
                s.n,
            )
            for s in summaries
        ),
    )


def tests_csv(rows: Sequence[ClassComparison]) -> str:
    return _csv(
        TEST_COLUMNS,
        (
            (
                r.scope,
                r.sample_x.value,
                r.sample_y.value,
                r.result.n_x,
                r.result.n_y,
                r.result.p_value,
                r.result.z_value,
                r.result.rank_sum,
            )
            for r in rows
        ),
    )


def basic_stats_csv(rows: Sequence[tuple[str, BasicStats]]) -> str:
    return _csv(
        BASIC_STATS_COLUMNS,
        (
            (league, b.label, b.goals_diff_per_match, b.win_ratio_diff, b.n_matches)
            for league, b in rows
        ),
    )


def render_report(
    estimates: Sequence[HomeAdvEstimate],
    comparisons: Sequence[ClassComparison],
    basic: Sequence[tuple[str, BasicStats]],
    scales: Mapping[str, ScaleFactor],
    correlations: Mapping[str, float],
) -> str:
    """Human-readable summary: class medians, test tables, notable pairs."""
    lines = ["Home advantage report", "=" * 21, ""]

    lines.append("Scale factors (score-ratio units -> win-probability units):")
    for league in sorted(scales):
        lines.append(f"  {league}: D = {scales[league].value:.4f}")
    lines.append("")

    lines.append("Median home advantage (win-probability units):")
    by_class = {
        cls: [e.home_adv_win_units for e in estimates if e.attendance_class is cls]
        for cls in CLASS_ORDER
    }
    for cls in CLASS_ORDER:
        values = by_class[cls]
        if values:
            lines.append(
                f"  {cls.value:<7} n={len(values):<5d} median={float(np.median(values)):+.4f}"
            )
        else:
            lines.append(f"  {cls.value:<7} absent (no windows in this class)")
    lines.append("")

    header = f"{'scope':<16} {'X':<7} {'Y':<7} {'n_x':>5} {'n_y':>5} {'p-value':>10} {'z':>8} {'ranksum':>12}"
    for title, scope_filter in (
        ("Overall comparisons:", lambda s: s == "overall"),
        ("Per-league comparisons:", lambda s: s != "overall"),
    ):
        rows = [r for r in comparisons if scope_filter(r.scope)]
        lines.append(title)
        if rows:
            lines.append(header)
            for r in rows:
                lines.append(
                    f"{r.scope:<16} {r.sample_x.value:<7} {r.sample_y.value:<7} "
                    f"{r.result.n_x:>5d} {r.result.n_y:>5d} "
                    f"{r.result.p_value:>10.3e} {r.result.z_value:>8.3f} "
                    f"{r.result.rank_sum:>12.1f}"
                )
        else:
            lines.append("  (nothing to compare)")
        if title.startswith("Per-league"):
            for league in sorted({e.league for e in estimates}):
                absent = [
                    cls.value
                    for cls in CLASS_ORDER
                    if not any(
                        e.league == league and e.attendance_class is cls
                        for e in estimates
                    )
                ]
                if absent:
                    lines.append(f"  note: {league} has no {', '.join(absent)} windows")
        lines.append("")

    significant = [r for r in comparisons if r.result.p_value < 0.05]
    lines.append("Pairs differing at p < 0.05:")
    if significant:
        for r in significant:
            lines.append(
                f"  {r.scope}: {r.sample_x.value} vs {r.sample_y.value} "
                f"(p = {r.result.p_value:.3e})"
            )
    else:
        lines.append("  none")
    lines.append("")

    if basic:
        lines.append("Basic statistics (per match):")
        lines.append(f"{'league':<16} {'period':<8} {'goals diff':>11} {'win-ratio diff':>15} {'n':>6}")
        for league, b in basic:
            lines.append(
                f"{league:<16} {b.label:<8} {b.goals_diff_per_match:>11.4f} "
                f"{b.win_ratio_diff:>15.4f} {b.n_matches:>6d}"
            )
        lines.append("")

    if correlations:
        lines.append("Closed-period home-match count vs final standing (Pearson):")
        for league in sorted(correlations):
            lines.append(f"  {league}: {correlations[league]:+.4f}")
        lines.append("")

    return "\n".join(lines)
