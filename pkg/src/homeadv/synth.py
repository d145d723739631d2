"""Synthetic schedules and seasons for testing and demos.

Fixtures come from the classic circle method: with an even team count T
a double round robin spans 2*(T-1) matchweeks of T/2 matches each.
Scores can be drawn from the same per-unit scoring process used for the
win-probability calibration, so generated seasons follow the model with
known team strengths and home advantage.
"""

from __future__ import annotations

import datetime as dt
from importlib import resources
from pathlib import Path

import numpy as np

from .calibration import ScoringProcessConfig, simulate_match
from .matches import Attendance, LeagueCalendar, MatchRecord, serialize_calendar_file, serialize_match_file
from .ratings import logistic


def round_robin_rounds(teams: list[str]) -> list[list[tuple[str, str]]]:
    """Double round-robin pairings: one list of (home, away) per matchweek."""
    n = len(teams)
    if n < 2 or n % 2:
        raise ValueError(f"need an even number of teams >= 2, got {n}")
    rotating = list(teams[1:])
    first_half = []
    for r in range(n - 1):
        order = [teams[0]] + rotating[r:] + rotating[:r]
        pairs = []
        for i in range(n // 2):
            a, b = order[i], order[n - 1 - i]
            # alternate the fixed team's venue so home counts stay balanced
            pairs.append((a, b) if (r + i) % 2 == 0 else (b, a))
        first_half.append(pairs)
    second_half = [[(away, home) for home, away in rnd] for rnd in first_half]
    return first_half + second_half


def schedule_from_calendar(
    calendar: LeagueCalendar,
    last_played_matchweek: int | None = None,
    start_date: dt.date = dt.date(2019, 8, 10),
) -> list[MatchRecord]:
    """Placeholder 0-0 fixtures realizing a calendar's shape.

    Useful when only matchweek labels and attendance classes matter
    (window bookkeeping), not the scores.  ``last_played_matchweek``
    truncates abandoned seasons.
    """
    teams = [f"{calendar.league} T{i:02d}" for i in range(calendar.teams)]
    rounds = round_robin_rounds(teams)
    last = last_played_matchweek or calendar.matchweeks
    if last > calendar.matchweeks:
        raise ValueError("last_played_matchweek exceeds the calendar")
    if len(rounds) < last:
        raise ValueError(
            f"{calendar.teams} teams give only {len(rounds)} rounds, "
            f"need {last} matchweeks"
        )
    fcm = calendar.first_closed_matchweek
    records = []
    for week in range(1, last + 1):
        closed = fcm is not None and week >= fcm
        for home, away in rounds[week - 1]:
            records.append(
                MatchRecord(
                    league=calendar.league,
                    season=calendar.season,
                    matchweek=week,
                    date=start_date + dt.timedelta(days=7 * (week - 1)),
                    home_team=home,
                    away_team=away,
                    home_goals=0,
                    away_goals=0,
                    attendance=Attendance.BEHIND_CLOSED_DOORS if closed else Attendance.SPECTATORS,
                    attendance_explicit=True,
                )
            )
    return records


def generate_season(
    calendar: LeagueCalendar,
    ratings: dict[str, float],
    home_adv: float,
    scoring: ScoringProcessConfig,
    rng: np.random.Generator,
    last_played_matchweek: int | None = None,
    start_date: dt.date = dt.date(2019, 8, 10),
) -> list[MatchRecord]:
    """Simulate a season's scores from known strengths and home advantage.

    The team list is taken from ``ratings`` (sorted) and must match the
    calendar's team count.
    """
    teams = sorted(ratings)
    if len(teams) != calendar.teams:
        raise ValueError(f"calendar expects {calendar.teams} teams, got {len(teams)}")
    skeleton = schedule_from_calendar(calendar, last_played_matchweek, start_date)
    name_map = dict(zip([f"{calendar.league} T{i:02d}" for i in range(calendar.teams)], teams))
    records = []
    for rec in skeleton:
        home = name_map[rec.home_team]
        away = name_map[rec.away_team]
        p = logistic(ratings[home] + home_adv - ratings[away])
        hg, ag = simulate_match(p, scoring, rng)
        records.append(
            MatchRecord(
                league=rec.league,
                season=rec.season,
                matchweek=rec.matchweek,
                date=rec.date,
                home_team=home,
                away_team=away,
                home_goals=hg,
                away_goals=ag,
                attendance=rec.attendance,
                attendance_explicit=True,
            )
        )
    return records


# --- bundled toy dataset ------------------------------------------------------

_TOY_SEED = 20200613
_TOY_LEAGUES = {
    # league -> (teams, matchweeks, first_closed in 2019/20, home_adv, rating spread)
    "Northern League": (8, 14, 10, 0.35, 1.2),
    "Southern League": (6, 10, None, 0.25, 0.9),
}
_TOY_SEASONS = ("2017/18", "2018/19", "2019/20")


def toy_calendars() -> list[LeagueCalendar]:
    cals = []
    for league, (teams, weeks, fcm, _, _) in sorted(_TOY_LEAGUES.items()):
        for season in _TOY_SEASONS:
            cals.append(
                LeagueCalendar(
                    league=league,
                    season=season,
                    matchweeks=weeks,
                    first_closed_matchweek=fcm if season == "2019/20" else None,
                    teams=teams,
                )
            )
    return cals


def write_toy_dataset(directory: str | Path) -> tuple[Path, Path]:
    """Regenerate the bundled toy dataset; returns (matches, calendar) paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(_TOY_SEED)
    scoring = ScoringProcessConfig(scoring_intensity=0.05, units=90, trials=1, seed=0)
    records = []
    for league, (teams, weeks, fcm, home_adv, spread) in sorted(_TOY_LEAGUES.items()):
        names = [f"{league.split()[0]} {chr(ord('A') + i)}" for i in range(teams)]
        strengths = dict(zip(names, np.linspace(0.0, -spread, teams)))
        for si, season in enumerate(_TOY_SEASONS):
            cal = LeagueCalendar(
                league=league,
                season=season,
                matchweeks=weeks,
                first_closed_matchweek=fcm if season == "2019/20" else None,
                teams=teams,
            )
            records.extend(
                generate_season(
                    cal,
                    strengths,
                    home_adv,
                    scoring,
                    rng,
                    start_date=dt.date(2017 + si, 8, 12),
                )
            )
    matches_path = directory / "toy_matches.csv"
    calendar_path = directory / "toy_calendar.csv"
    serialize_match_file(records, matches_path)
    serialize_calendar_file(toy_calendars(), calendar_path)
    return matches_path, calendar_path


def toy_dataset_paths() -> tuple[Path, Path]:
    """Paths of the toy dataset shipped with the package."""
    data = resources.files("homeadv") / "data"
    return Path(str(data / "toy_matches.csv")), Path(str(data / "toy_calendar.csv"))
