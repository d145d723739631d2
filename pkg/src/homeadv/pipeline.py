"""End-to-end run: ingest, rolling fits, calibration, tests, reports.

The scale factor converting score-ratio ratings to win-probability units
is fitted once per league: every match that closes a window contributes
its outcome together with the rating gap fitted at that window.  Window
fits are independent, so leagues and seasons can be processed in any
order without changing the output.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .calibration import (
    ScaleFactor,
    beta_from_matches,
    fit_scale_factor,
    outcome_records,
)
from .matches import (
    Attendance,
    DataFormatError,
    LeagueCalendar,
    MatchRecord,
    parse_calendar_file,
    parse_match_file,
    resolve_attendance,
)
from .ratings import FitConfig
from .reporting import (
    basic_stats_csv,
    boxplot_csv,
    emit_boxplot_data,
    estimates_csv,
    render_report,
    tests_csv,
    write_atomic,
)
from .rolling import (
    DEFAULT_WINDOW_WIDTH,
    HomeAdvEstimate,
    classify_window,
    fit_windows,
    season_start_year,
)
from .stats import (
    BasicStats,
    basic_stats,
    compare_all_classes,
    compute_standings,
    home_balance_correlation,
)

log = logging.getLogger(__name__)

ARTIFACT_NAMES = {
    "estimates": "estimates.csv",
    "boxplot": "boxplot_summary.csv",
    "tests": "tests.csv",
    "basic_stats": "basic_stats.csv",
    "metadata": "run_metadata.json",
    "report": "report.txt",
}


@dataclass(frozen=True)
class RunConfig:
    matches_path: Path
    calendar_path: Path
    out_dir: Path
    leagues: tuple[str, ...] | None = None
    seasons: tuple[str, ...] | None = None
    width: int = DEFAULT_WINDOW_WIDTH
    fit: FitConfig = field(default_factory=FitConfig)
    units: int = 90
    beta: float | None = None  # None: derive per league from the data
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if self.units < 1:
            raise ValueError(f"units must be >= 1, got {self.units}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass
class LeagueAnalysis:
    league: str
    estimates: list[HomeAdvEstimate]
    scale: ScaleFactor
    beta: float


@dataclass
class PipelineResult:
    estimates: list[HomeAdvEstimate]
    scales: dict[str, ScaleFactor]
    betas: dict[str, float]
    correlations: dict[str, float]
    artifacts: dict[str, Path]


def load_inputs(
    config: RunConfig,
) -> tuple[list[MatchRecord], dict[tuple[str, str], LeagueCalendar]]:
    """Parse and filter the match and calendar files."""
    records = parse_match_file(config.matches_path)
    calendars = parse_calendar_file(config.calendar_path)
    if config.leagues is not None:
        wanted = set(config.leagues)
        known = {r.league for r in records}
        unknown = wanted - known
        if unknown:
            raise DataFormatError(f"league filter names unknown leagues: {sorted(unknown)}")
        records = [r for r in records if r.league in wanted]
    if config.seasons is not None:
        wanted = set(config.seasons)
        records = [r for r in records if r.season in wanted]
    if not records:
        raise DataFormatError("no matches left after applying league/season filters")
    for key in sorted({(r.league, r.season) for r in records}):
        if key not in calendars:
            raise DataFormatError(f"no calendar row for league/season {key}")
    return records, calendars


def group_records(
    records: list[MatchRecord],
    calendars: dict[tuple[str, str], LeagueCalendar],
) -> dict[str, dict[str, list[MatchRecord]]]:
    """league -> season -> records, with attendance resolved per calendar."""
    grouped: dict[str, dict[str, list[MatchRecord]]] = {}
    for (league, season), cal in sorted(calendars.items()):
        season_records = [r for r in records if (r.league, r.season) == (league, season)]
        if season_records:
            grouped.setdefault(league, {})[season] = resolve_attendance(season_records, cal)
    return grouped


def analyze_league(
    league: str,
    by_season: dict[str, list[MatchRecord]],
    calendars: dict[tuple[str, str], LeagueCalendar],
    config: RunConfig,
) -> LeagueAnalysis:
    """Fit all windows of one league and convert to win units."""
    fitted = []
    for season in sorted(by_season, key=season_start_year):
        cal = calendars[(league, season)]
        fitted.extend(
            (cal, window, result)
            for window, result in fit_windows(
                by_season[season], cal, config.fit, config.width
            )
        )
    outcomes = []
    for _, window, result in fitted:
        closing = [m for m in window.matches if m.matchweek == window.end_matchweek]
        outcomes.extend(outcome_records(closing, result.params))
    if not outcomes:
        raise DataFormatError(f"{league}: no complete windows; cannot calibrate")
    scale = fit_scale_factor(outcomes)
    all_matches = [m for season in by_season.values() for m in season]
    beta = config.beta if config.beta is not None else beta_from_matches(all_matches, config.units)
    estimates = [
        HomeAdvEstimate(
            league=window.league,
            season=window.season,
            end_matchweek=window.end_matchweek,
            home_adv_raw=result.params.home_adv,
            home_adv_win_units=scale.value * result.params.home_adv,
            attendance_class=classify_window(window),
            n_matches=len(window.matches),
        )
        for _, window, result in fitted
    ]
    return LeagueAnalysis(league=league, estimates=estimates, scale=scale, beta=beta)


def _basic_stats_rows(
    grouped: dict[str, dict[str, list[MatchRecord]]]
) -> list[tuple[str, BasicStats]]:
    rows = []
    for league in sorted(grouped):
        periods: dict[str, list[MatchRecord]] = {"past": [], "normal": [], "closed": []}
        for season, matches in grouped[league].items():
            for m in matches:
                if season_start_year(season) < 2019:
                    periods["past"].append(m)
                elif m.attendance is Attendance.BEHIND_CLOSED_DOORS:
                    periods["closed"].append(m)
                else:
                    periods["normal"].append(m)
        for label in ("past", "normal", "closed"):
            if periods[label]:
                rows.append((league, basic_stats(periods[label], label)))
    return rows


def _closed_correlations(
    grouped: dict[str, dict[str, list[MatchRecord]]],
    calendars: dict[tuple[str, str], LeagueCalendar],
) -> dict[str, float]:
    """Home-count vs standings correlation for completed seasons with a
    closed period."""
    out: dict[str, float] = {}
    for league in sorted(grouped):
        for season, matches in grouped[league].items():
            if season_start_year(season) < 2019:
                continue
            closed = [m for m in matches if m.attendance is Attendance.BEHIND_CLOSED_DOORS]
            if not closed:
                continue
            cal = calendars[(league, season)]
            if len(matches) != cal.teams * (cal.teams - 1):
                log.info("%s %s incomplete; skipping standings correlation", league, season)
                continue
            try:
                out[league] = home_balance_correlation(closed, compute_standings(matches))
            except ValueError as exc:
                log.info("%s %s: %s", league, season, exc)
    return out


def run_pipeline(config: RunConfig) -> PipelineResult:
    """Run the full analysis and write all artifact files.

    Outputs are deterministic for fixed inputs and config: orderings are
    explicit and float formatting is shortest-roundtrip.
    """
    records, calendars = load_inputs(config)
    grouped = group_records(records, calendars)

    analyses = [
        analyze_league(league, grouped[league], calendars, config)
        for league in sorted(grouped)
    ]
    estimates = [e for a in analyses for e in a.estimates]
    scales = {a.league: a.scale for a in analyses}
    betas = {a.league: a.beta for a in analyses}

    comparisons = compare_all_classes(estimates, "overall") + compare_all_classes(
        estimates, "per-league"
    )
    boxplots = emit_boxplot_data(estimates)
    basic_rows = _basic_stats_rows(grouped)
    correlations = _closed_correlations(grouped, calendars)

    out = Path(config.out_dir)
    artifacts = {
        "estimates": write_atomic(out / ARTIFACT_NAMES["estimates"], estimates_csv(estimates)),
        "boxplot": write_atomic(out / ARTIFACT_NAMES["boxplot"], boxplot_csv(boxplots)),
        "tests": write_atomic(out / ARTIFACT_NAMES["tests"], tests_csv(comparisons)),
        "basic_stats": write_atomic(
            out / ARTIFACT_NAMES["basic_stats"], basic_stats_csv(basic_rows)
        ),
        "metadata": write_atomic(
            out / ARTIFACT_NAMES["metadata"], _metadata_json(config, analyses, records)
        ),
        "report": write_atomic(
            out / ARTIFACT_NAMES["report"],
            render_report(estimates, comparisons, basic_rows, scales, correlations),
        ),
    }
    return PipelineResult(
        estimates=estimates,
        scales=scales,
        betas=betas,
        correlations=correlations,
        artifacts=artifacts,
    )


def _metadata_json(
    config: RunConfig, analyses: list[LeagueAnalysis], records: list[MatchRecord]
) -> str:
    payload = {
        "version": __version__,
        "config": {
            "matches": str(config.matches_path),
            "calendar": str(config.calendar_path),
            "leagues": list(config.leagues) if config.leagues else None,
            "seasons": list(config.seasons) if config.seasons else None,
            "width": config.width,
            "step_size": config.fit.step_size,
            "max_iterations": config.fit.max_iterations,
            "convergence_tolerance": config.fit.convergence_tolerance,
            "units": config.units,
            "beta": config.beta,
            "trials": config.trials,
            "seed": config.seed,
        },
        "n_matches": len(records),
        "leagues": {
            a.league: {
                "scale_factor": a.scale.value,
                "scale_objective": a.scale.objective,
                "scoring_intensity": a.beta,
                "n_estimates": len(a.estimates),
            }
            for a in analyses
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


__all__ = [
    "ARTIFACT_NAMES",
    "LeagueAnalysis",
    "PipelineResult",
    "RunConfig",
    "analyze_league",
    "group_records",
    "load_inputs",
    "run_pipeline",
]
