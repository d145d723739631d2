"""Match records, league calendars, and CSV ingestion.

Input files are plain UTF-8 CSV.  Matches carry the header
``league,season,matchweek,date,home_team,away_team,home_goals,away_goals``
with an optional trailing ``attendance`` column (tokens ``normal`` /
``closed``).  Calendars carry
``league,season,matchweeks,first_closed_matchweek,teams`` where the
``first_closed_matchweek`` field is empty for seasons that never went
behind closed doors.
"""

from __future__ import annotations

import datetime as dt
import io
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, TextIO


class Attendance(Enum):
    """Whether a match was played in front of spectators."""

    SPECTATORS = "normal"
    BEHIND_CLOSED_DOORS = "closed"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


ATTENDANCE_TOKENS = {a.value: a for a in Attendance}

MATCH_COLUMNS = (
    "league",
    "season",
    "matchweek",
    "date",
    "home_team",
    "away_team",
    "home_goals",
    "away_goals",
)
MATCH_COLUMNS_FULL = MATCH_COLUMNS + ("attendance",)

CALENDAR_COLUMNS = (
    "league",
    "season",
    "matchweeks",
    "first_closed_matchweek",
    "teams",
)


class DataFormatError(ValueError):
    """Malformed input data; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class MatchRecord:
    """One played match.

    ``attendance_explicit`` tracks whether the attendance value came from
    the input row itself (as opposed to the parser default); an explicit
    value takes precedence over any calendar rule.  It is excluded from
    equality so that records survive a serialize/re-parse round trip.
    """

    league: str
    season: str
    matchweek: int
    date: dt.date
    home_team: str
    away_team: str
    home_goals: int
    away_goals: int
    attendance: Attendance = Attendance.SPECTATORS
    attendance_explicit: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "home_team", self.home_team.strip())
        object.__setattr__(self, "away_team", self.away_team.strip())
        if self.home_team == self.away_team:
            raise ValueError(f"home and away team are identical: {self.home_team!r}")
        if self.home_goals < 0 or self.away_goals < 0:
            raise ValueError(
                f"negative goals: {self.home_goals}-{self.away_goals} "
                f"({self.home_team} vs {self.away_team})"
            )
        if self.matchweek < 1:
            raise ValueError(f"matchweek must be >= 1, got {self.matchweek}")


@dataclass(frozen=True)
class LeagueCalendar:
    """Season framing: scheduled matchweeks and the closed-door cutover."""

    league: str
    season: str
    matchweeks: int
    first_closed_matchweek: int | None
    teams: int

    def __post_init__(self):
        if self.matchweeks < 1:
            raise ValueError(f"matchweeks must be >= 1, got {self.matchweeks}")
        if self.teams < 2:
            raise ValueError(f"teams must be >= 2, got {self.teams}")
        fcm = self.first_closed_matchweek
        if fcm is not None and not 1 <= fcm <= self.matchweeks:
            raise ValueError(
                f"first_closed_matchweek {fcm} outside 1..{self.matchweeks}"
            )

    @property
    def closed_matchweeks(self) -> int:
        """Matchweeks from the cutover to the end of the schedule."""
        if self.first_closed_matchweek is None:
            return 0
        return self.matchweeks - self.first_closed_matchweek + 1

    @property
    def matches_per_matchweek(self) -> int:
        return self.teams // 2


@dataclass(frozen=True)
class SeasonSummary:
    league: str
    season: str
    total_matches: int
    normal_matches: int
    closed_matches: int
    teams: int

    def __post_init__(self):
        if self.total_matches != self.normal_matches + self.closed_matches:
            raise ValueError("total_matches must equal normal + closed")


def _open_text(source: str | Path | TextIO | bytes) -> TextIO:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    return source


def _split_row(line: str) -> list[str]:
    return [cell.strip() for cell in line.rstrip("\r\n").split(",")]


def _parse_int(cell: str, name: str, line: int) -> int:
    try:
        return int(cell)
    except ValueError:
        raise DataFormatError(f"{name} must be an integer, got {cell!r}", line) from None


def parse_match_file(source: str | Path | TextIO | bytes) -> list[MatchRecord]:
    """Parse a match CSV into records, in file order.

    The header decides whether the optional ``attendance`` column is
    present; when it is absent every record defaults to spectators (a
    calendar rule may later override that, see ``classify_attendance``).

    Raises ``DataFormatError`` naming the line for any malformed row, and
    for an empty file.
    """
    fh = _open_text(source)
    header_line = fh.readline()
    if header_line == "":
        raise DataFormatError("empty match file")
    header = tuple(_split_row(header_line))
    if header == MATCH_COLUMNS_FULL:
        has_attendance = True
    elif header == MATCH_COLUMNS:
        has_attendance = False
    else:
        raise DataFormatError(
            f"unexpected header {','.join(header)!r}; "
            f"expected {','.join(MATCH_COLUMNS)}[,attendance]",
            line=1,
        )
    expected_cells = len(header)

    records: list[MatchRecord] = []
    for lineno, line in enumerate(fh, start=2):
        if line.strip() == "":
            continue
        cells = _split_row(line)
        if len(cells) != expected_cells:
            raise DataFormatError(
                f"expected {expected_cells} columns, got {len(cells)}", lineno
            )
        league, season, mw_s, date_s, home, away, hg_s, ag_s = cells[:8]
        matchweek = _parse_int(mw_s, "matchweek", lineno)
        home_goals = _parse_int(hg_s, "home_goals", lineno)
        away_goals = _parse_int(ag_s, "away_goals", lineno)
        try:
            date = dt.date.fromisoformat(date_s)
        except ValueError:
            raise DataFormatError(f"bad date {date_s!r} (want YYYY-MM-DD)", lineno) from None
        attendance = Attendance.SPECTATORS
        explicit = False
        if has_attendance:
            token = cells[8]
            if token not in ATTENDANCE_TOKENS:
                raise DataFormatError(
                    f"unknown attendance token {token!r} "
                    f"(expected one of {sorted(ATTENDANCE_TOKENS)})",
                    lineno,
                )
            attendance = ATTENDANCE_TOKENS[token]
            explicit = True
        try:
            record = MatchRecord(
                league=league,
                season=season,
                matchweek=matchweek,
                date=date,
                home_team=home,
                away_team=away,
                home_goals=home_goals,
                away_goals=away_goals,
                attendance=attendance,
                attendance_explicit=explicit,
            )
        except ValueError as exc:
            raise DataFormatError(str(exc), lineno) from None
        records.append(record)

    if not records:
        raise DataFormatError("match file contains a header but no data rows")
    return records


def serialize_match_file(records: Iterable[MatchRecord], dest: str | Path | TextIO) -> None:
    """Write records in the canonical 9-column format (attendance included)."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        fh.write(",".join(MATCH_COLUMNS_FULL) + "\n")
        for r in records:
            fh.write(
                f"{r.league},{r.season},{r.matchweek},{r.date.isoformat()},"
                f"{r.home_team},{r.away_team},{r.home_goals},{r.away_goals},"
                f"{r.attendance.value}\n"
            )
    finally:
        if own:
            fh.close()


def parse_calendar_file(
    source: str | Path | TextIO | bytes,
) -> dict[tuple[str, str], LeagueCalendar]:
    """Parse a calendar CSV keyed by (league, season)."""
    fh = _open_text(source)
    header_line = fh.readline()
    if header_line == "":
        raise DataFormatError("empty calendar file")
    header = tuple(_split_row(header_line))
    if header != CALENDAR_COLUMNS:
        raise DataFormatError(
            f"unexpected header {','.join(header)!r}; expected {','.join(CALENDAR_COLUMNS)}",
            line=1,
        )

    calendars: dict[tuple[str, str], LeagueCalendar] = {}
    for lineno, line in enumerate(fh, start=2):
        if line.strip() == "":
            continue
        cells = _split_row(line)
        if len(cells) != len(CALENDAR_COLUMNS):
            raise DataFormatError(
                f"expected {len(CALENDAR_COLUMNS)} columns, got {len(cells)}", lineno
            )
        league, season, mw_s, fcm_s, teams_s = cells
        matchweeks = _parse_int(mw_s, "matchweeks", lineno)
        teams = _parse_int(teams_s, "teams", lineno)
        fcm = None if fcm_s == "" else _parse_int(fcm_s, "first_closed_matchweek", lineno)
        try:
            cal = LeagueCalendar(
                league=league.strip(),
                season=season.strip(),
                matchweeks=matchweeks,
                first_closed_matchweek=fcm,
                teams=teams,
            )
        except ValueError as exc:
            raise DataFormatError(str(exc), lineno) from None
        key = (cal.league, cal.season)
        if key in calendars:
            raise DataFormatError(f"duplicate calendar for {key}", lineno)
        calendars[key] = cal
    if not calendars:
        raise DataFormatError("calendar file contains a header but no data rows")
    return calendars


def serialize_calendar_file(
    calendars: Iterable[LeagueCalendar], dest: str | Path | TextIO
) -> None:
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        fh.write(",".join(CALENDAR_COLUMNS) + "\n")
        for c in calendars:
            fcm = "" if c.first_closed_matchweek is None else str(c.first_closed_matchweek)
            fh.write(f"{c.league},{c.season},{c.matchweeks},{fcm},{c.teams}\n")
    finally:
        if own:
            fh.close()


def classify_attendance(record: MatchRecord, calendar: LeagueCalendar) -> Attendance:
    """Attendance class of one match under a calendar.

    An attendance value stated in the data file wins; otherwise matches
    from the first closed matchweek onward count as behind closed doors.
    """
    if (record.league, record.season) != (calendar.league, calendar.season):
        raise DataFormatError(
            f"calendar mismatch: match is {record.league} {record.season}, "
            f"calendar is {calendar.league} {calendar.season}"
        )
    if record.matchweek > calendar.matchweeks:
        raise DataFormatError(
            f"matchweek {record.matchweek} exceeds calendar's {calendar.matchweeks}"
        )
    if record.attendance_explicit:
        return record.attendance
    fcm = calendar.first_closed_matchweek
    if fcm is not None and record.matchweek >= fcm:
        return Attendance.BEHIND_CLOSED_DOORS
    return Attendance.SPECTATORS


def resolve_attendance(
    records: Iterable[MatchRecord], calendar: LeagueCalendar
) -> list[MatchRecord]:
    """Bake the calendar rule into each record's attendance field."""
    return [
        replace(r, attendance=classify_attendance(r, calendar), attendance_explicit=True)
        for r in records
    ]


def summarize_season(
    records: Iterable[MatchRecord], calendar: LeagueCalendar
) -> SeasonSummary:
    """Count a season's matches by attendance class."""
    records = list(records)
    if not records:
        raise DataFormatError("no matches to summarize")
    keys = {(r.league, r.season) for r in records}
    if len(keys) > 1:
        raise DataFormatError(f"matches span several league/seasons: {sorted(keys)}")
    closed = sum(
        1
        for r in records
        if classify_attendance(r, calendar) is Attendance.BEHIND_CLOSED_DOORS
    )
    teams = {r.home_team for r in records} | {r.away_team for r in records}
    return SeasonSummary(
        league=calendar.league,
        season=calendar.season,
        total_matches=len(records),
        normal_matches=len(records) - closed,
        closed_matches=closed,
        teams=len(teams),
    )
