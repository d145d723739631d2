"""Nonparametric comparisons of home-advantage samples, plus basic
descriptive statistics on match sets.

The two-sample comparison is Wilcoxon's rank-sum test of equal medians:
the statistic is the sum of (mid)ranks of the first sample within the
pooled ordering.  Small tie-free samples get an exact p-value by
enumerating the rank-sum distribution; larger or tied samples use the
normal approximation with tie-corrected variance and a continuity
correction.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .matches import MatchRecord
from .rolling import CLASS_ORDER, AttendanceClass, HomeAdvEstimate

log = logging.getLogger(__name__)

# exact enumeration is cheap up to this pooled size
_EXACT_LIMIT = 12


class TestMethod(Enum):
    EXACT = "exact"
    NORMAL_APPROXIMATION = "normal_approximation"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class RankSumResult:
    n_x: int
    n_y: int
    rank_sum: float
    z_value: float
    p_value: float
    method: TestMethod


@dataclass(frozen=True)
class ClassComparison:
    """A labelled rank-sum row, as in the overall / per-league test tables."""

    scope: str
    sample_x: AttendanceClass
    sample_y: AttendanceClass
    result: RankSumResult


@dataclass(frozen=True)
class BasicStats:
    label: str
    goals_diff_per_match: float
    win_ratio_diff: float
    n_matches: int


def _midranks(pooled: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing the mean of their rank range."""
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(pooled.size)
    i = 0
    while i < pooled.size:
        j = i
        while j < pooled.size and pooled[order[j]] == pooled[order[i]]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0  # mean of ranks i+1 .. j
        i = j
    return ranks


def _exact_rank_sum_counts(n: int, k: int) -> np.ndarray:
    """counts[s] = number of k-subsets of ranks {1..n} summing to s."""
    max_sum = n * (n + 1) // 2
    counts = np.zeros((k + 1, max_sum + 1), dtype=float)
    counts[0, 0] = 1.0
    for rank in range(1, n + 1):
        for size in range(min(rank, k), 0, -1):
            counts[size, rank:] += counts[size - 1, : max_sum - rank + 1]
    return counts[k]


def _normal_two_sided_p(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


def rank_sum_test(x: Sequence[float], y: Sequence[float]) -> RankSumResult:
    """Two-sided Wilcoxon rank-sum test of equal medians.

    ``rank_sum`` is the (mid)rank total of ``x`` in the pooled sample and
    ``z`` is signed by its gap from the null expectation, so swapping the
    samples negates ``z`` and keeps ``p``.  The continuity correction
    shrinks that gap by 0.5 without crossing zero.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    n_x, n_y = x.size, y.size
    n = n_x + n_y
    pooled = np.concatenate([x, y])
    ranks = _midranks(pooled)
    w = float(ranks[:n_x].sum())
    expected = n_x * (n + 1) / 2.0

    _, tie_counts = np.unique(pooled, return_counts=True)
    has_ties = bool((tie_counts > 1).any())

    # z from the normal approximation is reported for both methods
    tie_term = float((tie_counts**3 - tie_counts).sum()) / (n * (n - 1)) if n > 1 else 0.0
    variance = n_x * n_y / 12.0 * ((n + 1) - tie_term)
    if variance <= 0:
        z = 0.0
    else:
        gap = w - expected
        z = math.copysign(max(abs(gap) - 0.5, 0.0), gap) / math.sqrt(variance)

    if not has_ties and n <= _EXACT_LIMIT:
        counts = _exact_rank_sum_counts(n, n_x)
        total = counts.sum()
        w_int = round(w)
        p_low = counts[: w_int + 1].sum() / total
        p_high = counts[w_int:].sum() / total
        p = min(1.0, 2.0 * min(p_low, p_high))
        method = TestMethod.EXACT
    else:
        p = 1.0 if variance <= 0 else _normal_two_sided_p(z)
        method = TestMethod.NORMAL_APPROXIMATION

    return RankSumResult(
        n_x=n_x, n_y=n_y, rank_sum=w, z_value=z, p_value=p, method=method
    )


def compare_all_classes(
    estimates: Iterable[HomeAdvEstimate],
    grouping: str = "overall",
) -> list[ClassComparison]:
    """Rank-sum comparisons between attendance classes.

    ``grouping`` is ``"overall"`` (pool every league) or ``"per-league"``.
    Classes are compared pairwise in Past/Normal/Mixed/Closed order on the
    win-unit home advantage; pairs with an empty side are skipped with a
    log notice.
    """
    if grouping not in ("overall", "per-league"):
        raise ValueError(f"unknown grouping {grouping!r}")
    estimates = list(estimates)
    if grouping == "overall":
        scopes: list[tuple[str, list[HomeAdvEstimate]]] = [("overall", estimates)]
    else:
        leagues = sorted({e.league for e in estimates})
        scopes = [(lg, [e for e in estimates if e.league == lg]) for lg in leagues]

    rows = []
    for scope, group in scopes:
        samples = {
            cls: [e.home_adv_win_units for e in group if e.attendance_class is cls]
            for cls in CLASS_ORDER
        }
        present = [cls for cls in CLASS_ORDER if samples[cls]]
        if len(present) < 2:
            log.info("%s: fewer than two attendance classes, nothing to compare", scope)
            continue
        absent = [cls.value for cls in CLASS_ORDER if not samples[cls]]
        if absent:
            log.info("%s: no estimates for class(es) %s", scope, ", ".join(absent))
        for cls_x, cls_y in itertools.combinations(present, 2):
            rows.append(
                ClassComparison(
                    scope=scope,
                    sample_x=cls_x,
                    sample_y=cls_y,
                    result=rank_sum_test(samples[cls_x], samples[cls_y]),
                )
            )
    return rows


def median(values: Sequence[float]) -> float:
    """Midpoint-interpolated median (mean of the two central order stats)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("median of an empty sample")
    return float(np.median(values))


def basic_stats(matches: Sequence[MatchRecord], label: str) -> BasicStats:
    """Mean home-minus-away goals and win-ratio difference of a match set."""
    if not matches:
        raise ValueError("no matches to summarize")
    n = len(matches)
    goals_diff = sum(m.home_goals - m.away_goals for m in matches) / n
    home_wins = sum(1 for m in matches if m.home_goals > m.away_goals)
    away_wins = sum(1 for m in matches if m.home_goals < m.away_goals)
    return BasicStats(
        label=label,
        goals_diff_per_match=goals_diff,
        win_ratio_diff=(home_wins - away_wins) / n,
        n_matches=n,
    )


def compute_standings(matches: Sequence[MatchRecord]) -> dict[str, int]:
    """Final table ranks (1 = champion): points, then goal difference,
    then goals scored, then team name."""
    if not matches:
        raise ValueError("no matches to rank")
    points: dict[str, int] = {}
    scored: dict[str, int] = {}
    conceded: dict[str, int] = {}
    for m in matches:
        for team in (m.home_team, m.away_team):
            points.setdefault(team, 0)
            scored.setdefault(team, 0)
            conceded.setdefault(team, 0)
        scored[m.home_team] += m.home_goals
        conceded[m.home_team] += m.away_goals
        scored[m.away_team] += m.away_goals
        conceded[m.away_team] += m.home_goals
        if m.home_goals > m.away_goals:
            points[m.home_team] += 3
        elif m.home_goals < m.away_goals:
            points[m.away_team] += 3
        else:
            points[m.home_team] += 1
            points[m.away_team] += 1
    table = sorted(
        points,
        key=lambda t: (-points[t], -(scored[t] - conceded[t]), -scored[t], t),
    )
    return {team: rank for rank, team in enumerate(table, start=1)}


def home_balance_correlation(
    closed_matches: Sequence[MatchRecord], standings: Mapping[str, int]
) -> float:
    """Pearson correlation between closed-period home-match counts and
    final standing ranks."""
    if not closed_matches:
        raise ValueError("no closed-period matches")
    teams = sorted(standings)
    if len(teams) < 2:
        raise ValueError("need at least two teams")
    match_teams = {m.home_team for m in closed_matches} | {
        m.away_team for m in closed_matches
    }
    missing = match_teams - set(teams)
    if missing:
        raise ValueError(f"standings missing teams: {sorted(missing)}")
    home_counts = {t: 0 for t in teams}
    for m in closed_matches:
        home_counts[m.home_team] += 1
    x = np.array([home_counts[t] for t in teams], dtype=float)
    y = np.array([standings[t] for t in teams], dtype=float)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("zero variance: correlation undefined")
    return float(np.corrcoef(x, y)[0, 1])
