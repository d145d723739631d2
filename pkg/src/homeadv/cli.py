"""Command-line interface.

Subcommands mirror the pipeline stages: ``ingest`` validates and counts,
``rate`` fits a single window, ``series`` produces the rolling
home-advantage estimates, ``test`` compares attendance classes from a
series file, and ``report`` runs everything into an output directory.

Flags may also be given in a flat ``key = value`` config file (keys named
like the long flags, without dashes); explicit command-line flags win.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .matches import (
    DataFormatError,
    parse_calendar_file,
    parse_match_file,
    summarize_season,
)
from .pipeline import RunConfig, analyze_league, group_records, load_inputs, run_pipeline
from .ratings import FitConfig, FitDivergedError, fit_window
from .reporting import estimates_csv, read_estimates_csv, tests_csv, write_atomic
from .rolling import enumerate_windows, season_start_year
from .stats import compare_all_classes

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage failures exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_seasons(text: str) -> tuple[str, ...]:
    """Expand a seasons argument: comma list and/or ``A..B`` ranges."""
    seasons: list[str] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            first, last = part.split("..", 1)
            y0, y1 = season_start_year(first), season_start_year(last)
            if y1 < y0:
                raise ValueError(f"season range {part!r} runs backwards")
            seasons.extend(f"{y}/{str(y + 1)[-2:].zfill(2)}" for y in range(y0, y1 + 1))
        elif part:
            seasons.append(part)
    if not seasons:
        raise ValueError(f"empty seasons filter {text!r}")
    return tuple(seasons)


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataFormatError(f"expected key = value, got {line!r}", lineno)
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values

# config-file key -> (argparse dest, converter); booleans accept true/false
_CONFIG_KEYS = {
    "matches": ("matches", str),
    "calendar": ("calendar", str),
    "leagues": ("leagues", str),
    "seasons": ("seasons", str),
    "width": ("width", int),
    "alpha": ("alpha", float),
    "max-iters": ("max_iters", int),
    "tol": ("tol", float),
    "units": ("units", int),
    "beta": ("beta", float),
    "beta-from-data": ("beta_from_data", lambda s: s.lower() in ("1", "true", "yes")),
    "trials": ("trials", int),
    "seed": ("seed", int),
    "out": ("out", str),
}


def _apply_config_file(parser: argparse.ArgumentParser, path: str) -> None:
    defaults = {}
    for key, raw in _load_config_file(path).items():
        if key not in _CONFIG_KEYS:
            raise DataFormatError(f"unknown config key {key!r} in {path}")
        dest, convert = _CONFIG_KEYS[key]
        try:
            defaults[dest] = convert(raw)
        except ValueError:
            raise DataFormatError(f"bad value {raw!r} for config key {key!r}") from None
    parser.set_defaults(**defaults)


def _add_data_args(p: argparse.ArgumentParser):
    p.add_argument("--matches", help="match CSV file")
    p.add_argument("--calendar", help="calendar CSV file")
    p.add_argument("--leagues", help="comma-separated league filter")
    p.add_argument("--seasons", help="season filter: comma list and/or A..B ranges")


def _add_fit_args(p: argparse.ArgumentParser):
    p.add_argument("--width", type=int, default=5, help="window width in matchweeks")
    p.add_argument("--alpha", type=float, default=0.5, help="descent step size")
    p.add_argument("--max-iters", type=int, default=10_000, dest="max_iters")
    p.add_argument("--tol", type=float, default=1e-10, help="loss-decrease stop tolerance")


def _add_scoring_args(p: argparse.ArgumentParser):
    p.add_argument("--units", type=int, default=90, help="play units per match")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--beta", type=float, help="per-unit scoring intensity")
    group.add_argument(
        "--beta-from-data",
        action="store_true",
        dest="beta_from_data",
        help="derive scoring intensity from the ingested matches (default)",
    )
    p.add_argument("--trials", type=int, default=100_000, help="simulation trials")
    p.add_argument("--seed", type=int, default=0, help="64-bit simulation seed")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="homeadv",
        description="Estimate league-wide home advantage from match scores.",
    )
    parser.add_argument("--version", action="version", version=f"homeadv {__version__}")
    parser.add_argument("--config", help="flat key=value config file; flags override")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate inputs and print season summaries")
    _add_data_args(p)
    p.add_argument("--out", help="write the summary CSV here instead of stdout")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("rate", help="fit ratings for one matchweek window")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--league", required=True)
    p.add_argument("--season", required=True)
    p.add_argument("--end-matchweek", type=int, required=True, dest="end_matchweek")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("series", help="rolling home-advantage estimates CSV")
    _add_data_args(p)
    _add_fit_args(p)
    _add_scoring_args(p)
    p.add_argument("--out", help="write the series CSV here instead of stdout")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("test", help="rank-sum comparisons from a series file")
    p.add_argument("--estimates", required=True, help="series CSV from `homeadv series`")
    p.add_argument(
        "--grouping",
        choices=["overall", "per-league", "both"],
        default="both",
    )
    p.add_argument("--out", help="write the test CSV here instead of stdout")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("report", help="full pipeline into an output directory")
    _add_data_args(p)
    _add_fit_args(p)
    _add_scoring_args(p)
    p.add_argument("--out", required=False, help="output directory")
    p.set_defaults(func=cmd_report)

    return parser


def _require(parser_args, parser: _Parser, **names: str):
    for attr, flag in names.items():
        if getattr(parser_args, attr, None) is None:
            parser.error(f"argument {flag} is required (flag or config file)")


def _run_config(args) -> RunConfig:
    leagues = tuple(s.strip() for s in args.leagues.split(",")) if args.leagues else None
    seasons = _parse_seasons(args.seasons) if args.seasons else None
    beta = None if getattr(args, "beta", None) is None else args.beta
    return RunConfig(
        matches_path=Path(args.matches),
        calendar_path=Path(args.calendar),
        out_dir=Path(args.out) if args.out else Path("."),
        leagues=leagues,
        seasons=seasons,
        width=args.width,
        fit=FitConfig(
            step_size=args.alpha,
            max_iterations=args.max_iters,
            convergence_tolerance=args.tol,
        ),
        units=args.units,
        beta=beta,
        trials=args.trials,
        seed=args.seed,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def cmd_ingest(args, parser) -> int:
    _require(args, parser, matches="--matches", calendar="--calendar")
    records = parse_match_file(args.matches)
    calendars = parse_calendar_file(args.calendar)
    if args.leagues:
        wanted = {s.strip() for s in args.leagues.split(",")}
        records = [r for r in records if r.league in wanted]
    if args.seasons:
        wanted = set(_parse_seasons(args.seasons))
        records = [r for r in records if r.season in wanted]
    if not records:
        raise DataFormatError("no matches left after applying filters")
    lines = ["league,season,teams,total_matches,normal_matches,closed_matches"]
    for key in sorted({(r.league, r.season) for r in records}):
        if key not in calendars:
            raise DataFormatError(f"no calendar row for league/season {key}")
        season_records = [r for r in records if (r.league, r.season) == key]
        s = summarize_season(season_records, calendars[key])
        lines.append(
            f"{s.league},{s.season},{s.teams},{s.total_matches},"
            f"{s.normal_matches},{s.closed_matches}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_rate(args, parser) -> int:
    _require(args, parser, matches="--matches", calendar="--calendar")
    records = parse_match_file(args.matches)
    calendars = parse_calendar_file(args.calendar)
    key = (args.league, args.season)
    if key not in calendars:
        raise DataFormatError(f"no calendar row for league/season {key}")
    season_records = [r for r in records if (r.league, r.season) == key]
    if not season_records:
        raise DataFormatError(f"no matches for league/season {key}")
    windows = [
        w
        for w in enumerate_windows(season_records, calendars[key], args.width)
        if w.end_matchweek == args.end_matchweek
    ]
    if not windows or not windows[0].matches:
        raise DataFormatError(
            f"no window ending at matchweek {args.end_matchweek} for {key}"
        )
    window = windows[0]
    config = FitConfig(
        step_size=args.alpha,
        max_iterations=args.max_iters,
        convergence_tolerance=args.tol,
    )
    result = fit_window(list(window.matches), config)
    print(
        f"{args.league} {args.season} matchweeks "
        f"{window.start_matchweek}-{window.end_matchweek} "
        f"({len(window.matches)} matches)"
    )
    print(
        f"home_adv {result.params.home_adv:+.6f}  loss {result.loss:.6g}  "
        f"iterations {result.iterations}  converged {result.converged}"
    )
    for team, rating in sorted(result.params.ratings.items(), key=lambda kv: (-kv[1], kv[0])):
        print(f"{rating:+10.6f}  {team}")
    return EXIT_OK


def cmd_series(args, parser) -> int:
    _require(args, parser, matches="--matches", calendar="--calendar")
    config = _run_config(args)
    records, calendars = load_inputs(config)
    grouped = group_records(records, calendars)
    estimates = []
    for league in sorted(grouped):
        analysis = analyze_league(league, grouped[league], calendars, config)
        log.info("%s: scale factor %.4f", league, analysis.scale.value)
        estimates.extend(analysis.estimates)
    _emit(estimates_csv(estimates), args.out)
    return EXIT_OK


def cmd_test(args, parser) -> int:
    estimates = read_estimates_csv(args.estimates)
    groupings = ["overall", "per-league"] if args.grouping == "both" else [args.grouping]
    rows = []
    for grouping in groupings:
        rows.extend(compare_all_classes(estimates, grouping))
    _emit(tests_csv(rows), args.out)
    return EXIT_OK


def cmd_report(args, parser) -> int:
    _require(args, parser, matches="--matches", calendar="--calendar", out="--out")
    config = _run_config(args)
    result = run_pipeline(config)
    print(f"wrote {len(result.artifacts)} files to {config.out_dir}")
    for name in sorted(result.artifacts):
        print(f"  {result.artifacts[name].name}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    # first pass picks up --config so its values become defaults
    probe, _ = parser.parse_known_args(argv)
    if getattr(probe, "config", None):
        try:
            _apply_config_file(parser, probe.config)
        except (OSError, DataFormatError) as exc:
            print(f"homeadv: config error: {exc}", file=sys.stderr)
            return EXIT_DATA
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args, parser)
    except DataFormatError as exc:
        print(f"homeadv: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"homeadv: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FitDivergedError, FloatingPointError, OverflowError) as exc:
        print(f"homeadv: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RuntimeError as exc:
        print(f"homeadv: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"homeadv: invalid arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
