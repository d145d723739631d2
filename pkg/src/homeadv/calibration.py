"""Converting score-ratio ratings into win-probability units.

A match is modelled as ``units`` independent play units; in each unit the
home side scores with probability ``beta * p``, the away side with
``beta * (1 - p)``, and nobody with ``1 - beta``, where ``p`` is the
predicted scoring ratio.  Simulating (or exactly enumerating) this
process maps a rating gap to a winning probability, and a single
least-squares factor ``D`` rescales ratings so that
``1 / (1 + exp(-D * gap))`` tracks observed match outcomes
(win = 1, draw = 0.5, loss = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .matches import MatchRecord
from .ratings import RatingParams, logistic

# Trials are simulated in fixed-size blocks, each on its own
# counter-based stream keyed by (seed, block index); results therefore do
# not depend on how blocks are scheduled.
_TRIAL_BLOCK = 4096

_SCALE_SEARCH_UPPER = 50.0
_SCALE_SEARCH_TOL = 1e-8


@dataclass(frozen=True)
class ScoringProcessConfig:
    """Play-unit count, per-unit scoring intensity, and simulation size."""

    scoring_intensity: float
    units: int = 90
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.scoring_intensity <= 1:
            raise ValueError(
                f"scoring_intensity must be in (0, 1], got {self.scoring_intensity}"
            )
        if self.units < 1:
            raise ValueError(f"units must be >= 1, got {self.units}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class OutcomeRecord:
    """One match reduced to its rating gap and win/draw/loss value."""

    rating_gap: float
    outcome: float

    def __post_init__(self):
        if self.outcome not in (0.0, 0.5, 1.0):
            raise ValueError(f"outcome must be 0, 0.5 or 1, got {self.outcome}")


@dataclass(frozen=True)
class ScaleFactor:
    """Least-squares multiplier from score-ratio units to win units."""

    value: float
    objective: float


def beta_from_matches(matches: Sequence[MatchRecord], units: int = 90) -> float:
    """Scoring intensity implied by a dataset: mean total goals per unit."""
    if not matches:
        raise ValueError("cannot derive scoring intensity from no matches")
    mean_total = sum(m.home_goals + m.away_goals for m in matches) / len(matches)
    beta = mean_total / units
    if not 0 < beta <= 1:
        raise ValueError(
            f"mean total score {mean_total:.3f} over {units} units gives "
            f"scoring intensity {beta:.4f} outside (0, 1]"
        )
    return beta


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, block], dtype=np.uint64))
    )


def simulate_match(
    score_ratio: float,
    config: ScoringProcessConfig,
    rng: np.random.Generator,
) -> tuple[int, int]:
    """Play one simulated match, returning (home_score, away_score)."""
    if not 0 <= score_ratio <= 1:
        raise ValueError(f"score_ratio must be within [0, 1], got {score_ratio}")
    beta = config.scoring_intensity
    u = rng.random(config.units)
    home = int(np.count_nonzero(u < beta * score_ratio))
    away = int(np.count_nonzero(u < beta)) - home
    return home, away


def _simulate_score_diffs(
    score_ratio: float,
    config: ScoringProcessConfig,
    rng: np.random.Generator,
    n_trials: int,
) -> np.ndarray:
    """Vectorized ``simulate_match`` over trials: returns home - away."""
    beta = config.scoring_intensity
    u = rng.random((n_trials, config.units))
    home = (u < beta * score_ratio).sum(axis=1)
    away = (u < beta).sum(axis=1) - home
    return home - away


def estimate_win_probability(rating_gap: float, config: ScoringProcessConfig) -> float:
    """Monte Carlo winning probability for the home side at a rating gap.

    Draws count one half.  Deterministic for a fixed config seed.
    """
    p = logistic(rating_gap)
    wins = 0.0
    done = 0
    block = 0
    while done < config.trials:
        n = min(_TRIAL_BLOCK, config.trials - done)
        diff = _simulate_score_diffs(p, config, _block_rng(config.seed, block), n)
        wins += np.count_nonzero(diff > 0) + 0.5 * np.count_nonzero(diff == 0)
        done += n
        block += 1
    return wins / config.trials


def exact_win_probability(rating_gap: float, config: ScoringProcessConfig) -> float:
    """Exact winning probability by enumerating the scoring process.

    Propagates the distribution of the score difference through all play
    units (cost O(units^2)); intended for moderate unit counts where it
    serves as a deterministic check on the simulation.
    """
    p = logistic(rating_gap)
    beta = config.scoring_intensity
    n = config.units
    up, down = beta * p, beta * (1.0 - p)
    stay = 1.0 - beta
    # diff distribution over [-n, n], index shifted by n
    dist = np.zeros(2 * n + 1)
    dist[n] = 1.0
    for _ in range(n):
        nxt = stay * dist
        nxt[1:] += up * dist[:-1]
        nxt[:-1] += down * dist[1:]
        dist = nxt
    return float(dist[n + 1 :].sum() + 0.5 * dist[n])


def fit_scale_factor(records: Sequence[OutcomeRecord]) -> ScaleFactor:
    """Least-squares scale from rating gaps to match outcomes.

    Minimizes ``sum((outcome - logistic(D * gap))^2)`` over D in
    [0, 50] by golden-section search (absolute tolerance 1e-8); when two
    probes tie, the smaller-D side is kept.
    """
    if not records:
        raise ValueError("cannot fit a scale factor to no outcome records")
    gaps = np.array([r.rating_gap for r in records])
    outcomes = np.array([r.outcome for r in records])

    def objective(d: float) -> float:
        z = d * gaps
        w_hat = np.empty_like(z)
        pos = z >= 0
        w_hat[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        w_hat[~pos] = ez / (1.0 + ez)
        e = outcomes - w_hat
        return float(e @ e)

    # coarse scan first so the golden-section bracket surrounds the global
    # minimum even when the objective is not unimodal over the whole range
    grid = np.arange(0.0, _SCALE_SEARCH_UPPER + 0.25, 0.5)
    best = int(np.argmin([objective(d) for d in grid]))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    d_star = _golden_section_min(objective, float(lo), float(hi), _SCALE_SEARCH_TOL)
    return ScaleFactor(value=d_star, objective=objective(d_star))


def _golden_section_min(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section minimum of a unimodal f on [lo, hi]; ties go left."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    inv_phi2 = (3.0 - math.sqrt(5.0)) / 2.0
    h = hi - lo
    c = lo + inv_phi2 * h
    d = lo + inv_phi * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            h = hi - lo
            c = lo + inv_phi2 * h
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            h = hi - lo
            d = lo + inv_phi * h
            fd = f(d)
    return lo if f(lo) <= min(fc, fd) else (c if fc <= fd else d)


def match_outcome(home_goals: int, away_goals: int) -> float:
    """Win/draw/loss value for the home side: 1, 0.5 or 0."""
    if home_goals > away_goals:
        return 1.0
    if home_goals < away_goals:
        return 0.0
    return 0.5


def outcome_records(
    matches: Iterable[MatchRecord], params: RatingParams
) -> list[OutcomeRecord]:
    """Pair each match's outcome with its fitted rating gap."""
    return [
        OutcomeRecord(
            rating_gap=params.rating_gap(m.home_team, m.away_team),
            outcome=match_outcome(m.home_goals, m.away_goals),
        )
        for m in matches
    ]


def convert_ratings(params: RatingParams, scale: ScaleFactor) -> RatingParams:
    """Rescale ratings and home advantage into win-probability units."""
    return RatingParams(
        ratings={t: scale.value * r for t, r in params.ratings.items()},
        home_adv=scale.value * params.home_adv,
    )
