"""Least-squares logistic rating fit on match scores.

Each team gets one strength value and the league gets one shared
home-advantage value.  The predicted scoring ratio for a match is
``1 / (1 + exp(-(r_home + home_adv - r_away)))`` and the fit minimizes
the squared gap to the smoothed actual ratio
``(home_goals + 1) / (home_goals + away_goals + 2)`` over all matches,
by full-batch steepest descent.

Ratings are an interval scale: adding a constant to every rating leaves
all predictions unchanged, so fitted ratings are reported with the top
team pinned at zero.  The home-advantage value is unaffected by that
shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .matches import MatchRecord


class FitDivergedError(RuntimeError):
    """Raised when the descent produces a non-finite loss."""


@dataclass(frozen=True)
class FitConfig:
    """Steepest-descent settings.

    ``step_size`` is the initial step; a step that would increase the
    loss is rejected and retried at half length (see ``fit_score_targets``),
    so the default works across window sizes.
    """

    step_size: float = 0.5
    max_iterations: int = 10_000
    convergence_tolerance: float = 1e-10
    initial_rating: float = 0.0

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if self.convergence_tolerance <= 0:
            raise ValueError(
                f"convergence_tolerance must be > 0, got {self.convergence_tolerance}"
            )
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class RatingParams:
    """Team ratings plus the league-wide home advantage."""

    ratings: dict[str, float]
    home_adv: float = 0.0

    def rating_gap(self, home_team: str, away_team: str) -> float:
        """Model argument for a pairing: r_home + home_adv - r_away."""
        return self.ratings[home_team] + self.home_adv - self.ratings[away_team]


@dataclass(frozen=True)
class FitResult:
    params: RatingParams
    loss: float
    residuals: tuple[float, ...]
    iterations: int
    converged: bool
    step_rejections: int = field(default=0, compare=False)


def modified_score_ratio(home_goals: int, away_goals: int) -> float:
    """Smoothed share of the scoring credited to the home side.

    One goal is added to each team before forming the ratio so shut-outs
    do not produce degenerate 0/1 targets; the result is strictly inside
    (0, 1).
    """
    if home_goals < 0 or away_goals < 0:
        raise ValueError(f"goals must be non-negative, got {home_goals}, {away_goals}")
    return (home_goals + 1) / (home_goals + away_goals + 2)


def logistic(z: float) -> float:
    """Overflow-safe 1 / (1 + exp(-z))."""
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def predict_score_ratio(r_home: float, r_away: float, home_adv: float) -> float:
    """Predicted home scoring ratio from the strength difference."""
    return logistic(r_home + home_adv - r_away)


def normalize(params: RatingParams) -> RatingParams:
    """Shift ratings so the best team sits at 0; home_adv is untouched.

    Predictions only depend on rating differences, so this changes no
    model output.
    """
    if not params.ratings:
        raise ValueError("cannot normalize an empty rating vector")
    top = max(params.ratings.values())
    return RatingParams(
        ratings={t: r - top for t, r in params.ratings.items()},
        home_adv=params.home_adv,
    )


# --- vector kernel -----------------------------------------------------------
#
# The descent works on a flat vector [r_0 .. r_{T-1}, home_adv] with teams
# in sorted-name order, which keeps results deterministic.


def _sigmoid_vec(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _match_arrays(
    matches: Sequence[MatchRecord], team_index: dict[str, int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        home = np.array([team_index[m.home_team] for m in matches], dtype=np.intp)
        away = np.array([team_index[m.away_team] for m in matches], dtype=np.intp)
    except KeyError as exc:
        raise ValueError(f"match references unknown team {exc.args[0]!r}") from None
    targets = np.array(
        [modified_score_ratio(m.home_goals, m.away_goals) for m in matches]
    )
    return home, away, targets


def _predictions(
    x: np.ndarray, home: np.ndarray, away: np.ndarray
) -> np.ndarray:
    r, h = x[:-1], x[-1]
    return _sigmoid_vec(r[home] + h - r[away])


def _loss_vec(
    x: np.ndarray, home: np.ndarray, away: np.ndarray, targets: np.ndarray
) -> float:
    e = targets - _predictions(x, home, away)
    return float(e @ e)


def _gradient_vec(
    x: np.ndarray, home: np.ndarray, away: np.ndarray, targets: np.ndarray
) -> np.ndarray:
    n_teams = x.size - 1
    p = _predictions(x, home, away)
    w = -2.0 * (targets - p) * p * (1.0 - p)
    g = np.zeros_like(x)
    g[:-1] = np.bincount(home, weights=w, minlength=n_teams) - np.bincount(
        away, weights=w, minlength=n_teams
    )
    g[-1] = w.sum()
    return g


def _params_to_vector(
    params: RatingParams, matches: Sequence[MatchRecord]
) -> tuple[list[str], dict[str, int], np.ndarray]:
    teams = sorted(params.ratings)
    index = {t: i for i, t in enumerate(teams)}
    x = np.array([params.ratings[t] for t in teams] + [params.home_adv])
    # fail early on teams missing a rating entry
    for m in matches:
        if m.home_team not in index or m.away_team not in index:
            missing = m.home_team if m.home_team not in index else m.away_team
            raise ValueError(f"match references unknown team {missing!r}")
    return teams, index, x


def loss(params: RatingParams, matches: Sequence[MatchRecord]) -> float:
    """Sum of squared gaps between actual and predicted scoring ratios."""
    _, index, x = _params_to_vector(params, matches)
    if not matches:
        return 0.0
    home, away, targets = _match_arrays(matches, index)
    return _loss_vec(x, home, away, targets)


def gradient(params: RatingParams, matches: Sequence[MatchRecord]) -> RatingParams:
    """Partial derivatives of ``loss``, shaped like the parameters.

    The returned object holds d(loss)/d(r_team) in ``ratings`` and
    d(loss)/d(home_adv) in ``home_adv``.
    """
    teams, index, x = _params_to_vector(params, matches)
    if not matches:
        return RatingParams(ratings={t: 0.0 for t in teams}, home_adv=0.0)
    home, away, targets = _match_arrays(matches, index)
    g = _gradient_vec(x, home, away, targets)
    return RatingParams(
        ratings={t: float(g[i]) for i, t in enumerate(teams)},
        home_adv=float(g[-1]),
    )


def fit_score_targets(
    pairs: Iterable[tuple[str, str, float]],
    config: FitConfig = FitConfig(),
) -> FitResult:
    """Fit ratings to explicit (home_team, away_team, target_ratio) triples.

    This is the engine under ``fit_window``; it is public so callers can
    fit pre-computed scoring ratios directly.  Descent runs from a flat
    start until an accepted step improves the loss by less than the
    configured tolerance; a step that would worsen the loss is rejected
    and retried at half length, so accepted iterations never increase the
    loss.  The result is deterministic for fixed inputs and config.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("cannot fit an empty match set")
    teams = sorted({p[0] for p in pairs} | {p[1] for p in pairs})
    index = {t: i for i, t in enumerate(teams)}
    home = np.array([index[h] for h, _, _ in pairs], dtype=np.intp)
    away = np.array([index[a] for _, a, _ in pairs], dtype=np.intp)
    targets = np.array([t for _, _, t in pairs], dtype=float)
    if np.any(~np.isfinite(targets)) or np.any(targets <= 0) or np.any(targets >= 1):
        raise ValueError("target ratios must lie strictly inside (0, 1)")

    x = np.full(len(teams) + 1, config.initial_rating, dtype=float)
    x[-1] = 0.0
    fx = _loss_vec(x, home, away, targets)
    if not math.isfinite(fx):
        raise FitDivergedError(
            "initial loss is not finite; check initial_rating and inputs"
        )

    step = config.step_size
    iterations = 0
    rejections = 0
    converged = False
    for _ in range(config.max_iterations):
        g = _gradient_vec(x, home, away, targets)
        while True:
            x_new = x - step * g
            f_new = _loss_vec(x_new, home, away, targets)
            if math.isfinite(f_new) and f_new <= fx:
                break
            if not math.isfinite(f_new) and step <= np.finfo(float).tiny:
                raise FitDivergedError(
                    "loss became non-finite; reduce step_size (alpha)"
                )
            rejections += 1
            step *= 0.5
            if step < 1e-30:
                # no descent possible at any step length: numerically optimal
                f_new, x_new = fx, x
                break
        decrease = fx - f_new
        x, fx = x_new, f_new
        iterations += 1
        if decrease < config.convergence_tolerance:
            converged = True
            break

    residuals = targets - _predictions(x, home, away)
    final_loss = float(residuals @ residuals)
    params = normalize(
        RatingParams(
            ratings={t: float(x[i]) for i, t in enumerate(teams)},
            home_adv=float(x[-1]),
        )
    )
    return FitResult(
        params=params,
        loss=final_loss,
        residuals=tuple(float(r) for r in residuals),
        iterations=iterations,
        converged=converged,
        step_rejections=rejections,
    )


def fit_window(
    matches: Sequence[MatchRecord], config: FitConfig = FitConfig()
) -> FitResult:
    """Fit ratings and home advantage to a set of played matches.

    Residuals are reported in the input match order; the returned ratings
    are normalized (top team at 0).
    """
    if not matches:
        raise ValueError("cannot fit an empty match set")
    return fit_score_targets(
        (
            (m.home_team, m.away_team, modified_score_ratio(m.home_goals, m.away_goals))
            for m in matches
        ),
        config,
    )
