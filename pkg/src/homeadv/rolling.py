"""Per-matchweek home-advantage series over sliding matchweek windows.

For every matchweek (starting once a full window is available) the
rating model is fitted to the matches of that matchweek and the
``width - 1`` preceding ones.  Each fitted window yields one
home-advantage estimate, labelled by the spectator situation of its
matches: pre-2019/20 windows are Past; 2019/20 windows are Normal,
Closed, or Mixed depending on whether their matches had crowds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from .calibration import ScaleFactor
from .matches import Attendance, LeagueCalendar, MatchRecord, classify_attendance
from .ratings import FitConfig, FitResult, fit_window

log = logging.getLogger(__name__)

DEFAULT_WINDOW_WIDTH = 5

# Seasons starting before this year predate the pandemic interruption and
# are always classed as Past.
_PANDEMIC_SEASON_START = 2019


class AttendanceClass(Enum):
    PAST = "Past"
    NORMAL = "Normal"
    MIXED = "Mixed"
    CLOSED = "Closed"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


CLASS_ORDER = (
    AttendanceClass.PAST,
    AttendanceClass.NORMAL,
    AttendanceClass.MIXED,
    AttendanceClass.CLOSED,
)


@dataclass(frozen=True)
class Window:
    """Matches of ``width`` consecutive matchweeks ending at ``end_matchweek``."""

    league: str
    season: str
    end_matchweek: int
    width: int
    matches: tuple[MatchRecord, ...]

    @property
    def start_matchweek(self) -> int:
        return self.end_matchweek - self.width + 1


@dataclass(frozen=True)
class HomeAdvEstimate:
    """One point of the home-advantage series."""

    league: str
    season: str
    end_matchweek: int
    home_adv_raw: float
    home_adv_win_units: float
    attendance_class: AttendanceClass
    n_matches: int


def season_start_year(season: str) -> int:
    """Leading year of a season label like ``2019/20``."""
    try:
        return int(season.split("/")[0])
    except ValueError:
        raise ValueError(f"cannot parse season label {season!r}") from None


def enumerate_windows(
    records: list[MatchRecord],
    calendar: LeagueCalendar,
    width: int = DEFAULT_WINDOW_WIDTH,
) -> list[Window]:
    """All sliding windows of one season, ordered by end matchweek.

    One window per end matchweek from ``width`` up to the last matchweek
    with any played match; matches are assigned by their matchweek label.
    Matchweeks with no played matches (postponements) leave gaps inside
    windows rather than shifting them.
    """
    if width < 1:
        raise ValueError(f"window width must be >= 1, got {width}")
    if not records:
        return []
    keys = {(r.league, r.season) for r in records}
    if keys != {(calendar.league, calendar.season)}:
        raise ValueError(
            f"records {sorted(keys)} do not all match calendar "
            f"({calendar.league}, {calendar.season})"
        )
    by_week: dict[int, list[MatchRecord]] = {}
    for r in records:
        if r.matchweek > calendar.matchweeks:
            raise ValueError(
                f"matchweek {r.matchweek} exceeds calendar's {calendar.matchweeks}"
            )
        by_week.setdefault(r.matchweek, []).append(r)
    last_played = max(by_week)
    windows = []
    for end in range(width, last_played + 1):
        matches = tuple(
            m
            for week in range(end - width + 1, end + 1)
            for m in by_week.get(week, ())
        )
        windows.append(
            Window(
                league=calendar.league,
                season=calendar.season,
                end_matchweek=end,
                width=width,
                matches=matches,
            )
        )
    return windows


def classify_window(window: Window, season: str | None = None) -> AttendanceClass:
    """Attendance class of a window from its season and match composition."""
    if not window.matches:
        raise ValueError(
            f"cannot classify empty window {window.league} {window.season} "
            f"mw {window.end_matchweek}"
        )
    season = window.season if season is None else season
    if season_start_year(season) < _PANDEMIC_SEASON_START:
        return AttendanceClass.PAST
    kinds = {m.attendance for m in window.matches}
    if kinds == {Attendance.BEHIND_CLOSED_DOORS}:
        return AttendanceClass.CLOSED
    if kinds == {Attendance.SPECTATORS}:
        return AttendanceClass.NORMAL
    return AttendanceClass.MIXED


def fit_windows(
    records: list[MatchRecord],
    calendar: LeagueCalendar,
    fit_config: FitConfig = FitConfig(),
    width: int = DEFAULT_WINDOW_WIDTH,
) -> list[tuple[Window, FitResult]]:
    """Fit every non-empty window of one season.

    Attendance is resolved against the calendar before windowing, so the
    window classes reflect the calendar's closed period even when the
    input rows carry no attendance column.
    """
    from .matches import resolve_attendance

    resolved = resolve_attendance(records, calendar)
    fitted = []
    for window in enumerate_windows(resolved, calendar, width):
        if not window.matches:
            log.warning(
                "skipping empty window %s %s mw %d",
                window.league,
                window.season,
                window.end_matchweek,
            )
            continue
        try:
            result = fit_window(list(window.matches), fit_config)
        except Exception as exc:
            raise RuntimeError(
                f"fit failed for {window.league} {window.season} "
                f"matchweek {window.end_matchweek}: {exc}"
            ) from exc
        fitted.append((window, result))
    return fitted


def estimate_series(
    records: list[MatchRecord],
    calendar: LeagueCalendar,
    fit_config: FitConfig = FitConfig(),
    width: int = DEFAULT_WINDOW_WIDTH,
    scale: ScaleFactor | None = None,
) -> list[HomeAdvEstimate]:
    """Home-advantage series for one season.

    ``scale`` converts raw values into win-probability units; without one
    the conversion column repeats the raw value (scale 1), which suits
    quick looks at a single season.  Deterministic for fixed inputs.
    """
    fitted = fit_windows(records, calendar, fit_config, width)
    factor = 1.0 if scale is None else scale.value
    return [
        HomeAdvEstimate(
            league=window.league,
            season=window.season,
            end_matchweek=window.end_matchweek,
            home_adv_raw=result.params.home_adv,
            home_adv_win_units=factor * result.params.home_adv,
            attendance_class=classify_window(window),
            n_matches=len(window.matches),
        )
        for window, result in fitted
    ]
