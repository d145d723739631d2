"""Home-advantage estimation for football leagues from match scores."""

__version__ = "0.1.0"

from .matches import (
    Attendance,
    DataFormatError,
    LeagueCalendar,
    MatchRecord,
    SeasonSummary,
    classify_attendance,
    parse_calendar_file,
    parse_match_file,
    resolve_attendance,
    serialize_calendar_file,
    serialize_match_file,
    summarize_season,
)
from .ratings import (
    FitConfig,
    FitDivergedError,
    FitResult,
    RatingParams,
    fit_score_targets,
    fit_window,
    gradient,
    loss,
    modified_score_ratio,
    normalize,
    predict_score_ratio,
)

__all__ = [
    "Attendance",
    "DataFormatError",
    "LeagueCalendar",
    "MatchRecord",
    "SeasonSummary",
    "classify_attendance",
    "parse_calendar_file",
    "parse_match_file",
    "resolve_attendance",
    "serialize_calendar_file",
    "serialize_match_file",
    "summarize_season",
    "FitConfig",
    "FitDivergedError",
    "FitResult",
    "RatingParams",
    "fit_score_targets",
    "fit_window",
    "gradient",
    "loss",
    "modified_score_ratio",
    "normalize",
    "predict_score_ratio",
    "__version__",
]
