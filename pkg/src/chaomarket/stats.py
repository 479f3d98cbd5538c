"""Distributional observables of simulated money vectors.

The analyses revolve around the empirical complementary CDF — the
probability that an agent's money is greater than or equal to a threshold —
evaluated at the distinct observed money values (no binning, so there is no
hidden bin-width parameter).  Two regression fits summarize its shape:

  * exponential: least squares on (m, ln P); P ~ exp(-m/T_eff) appears as a
    straight line and the reported parameter is the decay rate 1/T_eff;
  * power law: least squares on (ln m, ln P) over the high-money tail;
    P ~ m^-alpha appears as a straight line with slope -alpha.

Both report the r-squared of the transformed linear regression, which is
the quantitative stand-in for "looks like a straight line" on the
corresponding axes.  A Gini coefficient and a rank-ordered win/loss profile
complete the picture.

Agents that never traded keep exactly their initial money and pile up in a
single spike; by default they are excluded from distribution analyses so
the spike does not mask the behavior of the trading population.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .market import SimulationOutput, classify_agents


class EmptyInputError(ValueError):
    """No data left to analyze (empty vector, or everything excluded)."""


class InsufficientPointsError(ValueError):
    """Too few distinct points in the requested fit window."""


@dataclass(frozen=True)
class Ccdf:
    """Empirical P(M >= m) at the distinct observed money values."""

    money: np.ndarray          # strictly increasing
    probability: np.ndarray    # non-increasing, in (0, 1]

    def __post_init__(self):
        money = np.asarray(self.money, dtype=np.float64)
        probability = np.asarray(self.probability, dtype=np.float64)
        if money.ndim != 1 or probability.ndim != 1:
            raise ValueError("ccdf arrays must be one-dimensional")
        if money.shape != probability.shape:
            raise ValueError("money and probability lengths differ")
        if money.shape[0] < 1:
            raise EmptyInputError("ccdf must hold at least one point")
        if np.any(np.diff(money) <= 0):
            raise ValueError("money thresholds must be strictly increasing")
        if np.any(probability <= 0) or np.any(probability > 1):
            raise ValueError("probabilities must lie in (0, 1]")
        if np.any(np.diff(probability) > 0):
            raise ValueError("probabilities must be non-increasing")
        object.__setattr__(self, "money", money)
        object.__setattr__(self, "probability", probability)

    def __len__(self) -> int:
        return self.money.shape[0]


def ccdf(money: np.ndarray, exclude: Iterable[int] = ()) -> Ccdf:
    """Empirical complementary CDF of a money vector.

    `exclude` lists agent indices to drop before evaluation (typically the
    passive set).  P is evaluated at each distinct remaining value, so the
    first point always has probability 1.
    """
    money = np.asarray(money, dtype=np.float64)
    if money.ndim != 1:
        raise ValueError(f"money must be one-dimensional: got {money.ndim}")
    if not np.all(np.isfinite(money)) or np.any(money < 0):
        raise ValueError("money entries must be finite and non-negative")
    excluded = np.zeros(money.shape[0], dtype=bool)
    for a in exclude:
        if not 0 <= a < money.shape[0]:
            raise IndexError(f"excluded agent {a} outside [0, {money.shape[0]})")
        excluded[a] = True
    kept = money[~excluded]
    if kept.shape[0] == 0:
        raise EmptyInputError("no agents left after exclusion")
    ordered = np.sort(kept)
    values = np.unique(ordered)
    below = np.searchsorted(ordered, values, side="left")
    probability = (ordered.shape[0] - below) / ordered.shape[0]
    return Ccdf(money=values, probability=probability)


@dataclass(frozen=True)
class FitResult:
    """Straight-line fit of a CCDF on transformed axes."""

    kind: str                       # "exponential" or "power_law"
    parameter: float                # decay rate 1/T_eff, or exponent alpha
    r_squared: float
    fit_range: tuple[float, float]  # money window the fit used
    n_points: int


def _linear_fit(u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and r^2 of v against u."""
    slope, intercept = np.polyfit(u, v, 1)
    residuals = v - (slope * u + intercept)
    ss_res = float(np.sum(residuals ** 2))
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), r_squared


def exponential_fit_range(curve: Ccdf, coverage: float = 0.9
                          ) -> tuple[float, float]:
    """Default exponential window: the lowest `coverage` of agents.

    The window runs from the minimum observed money up to the largest value
    still reached by at least (1 - coverage) of the population, i.e. it cuts
    away the top (1 - coverage) tail.
    """
    if not 0.0 < coverage <= 1.0:
        raise ValueError(f"coverage must lie in (0, 1]: got {coverage}")
    inside = curve.money[curve.probability >= 1.0 - coverage]
    if inside.shape[0] == 0:
        raise InsufficientPointsError(
            f"no ccdf points inside the lowest-{coverage:.0%} window")
    return float(curve.money[0]), float(inside[-1])


def fit_exponential(curve: Ccdf, fit_range: tuple[float, float] | None = None,
                    coverage: float = 0.9) -> FitResult:
    """Fit P ~ exp(-m/T_eff) on (m, ln P); parameter is 1/T_eff.

    `fit_range` bounds the money values used; when omitted it defaults to
    the lowest-`coverage` window of the population.
    """
    if fit_range is None:
        fit_range = exponential_fit_range(curve, coverage)
        if fit_range[0] >= fit_range[1]:
            raise InsufficientPointsError(
                "default exponential window collapsed to a single money value")
    low, high = float(fit_range[0]), float(fit_range[1])
    if not low < high:
        raise ValueError(f"fit range must satisfy low < high: got ({low}, {high})")
    mask = (curve.money >= low) & (curve.money <= high)
    m = curve.money[mask]
    p = curve.probability[mask]
    if m.shape[0] < 3:
        raise InsufficientPointsError(
            f"exponential fit needs >= 3 points in [{low}, {high}]: "
            f"got {m.shape[0]}")
    slope, r_squared = _linear_fit(m, np.log(p))
    return FitResult(kind="exponential", parameter=-slope,
                     r_squared=r_squared, fit_range=(low, high),
                     n_points=int(m.shape[0]))


def fit_power_law(curve: Ccdf, tail_fraction: float = 0.1) -> FitResult:
    """Fit P ~ m^-alpha on (ln m, ln P) over the top tail; parameter is alpha.

    The tail is the set of CCDF points reached by at most `tail_fraction`
    of the population (the top tail_fraction of agents by money).  It must
    contain at least 3 distinct positive money values.
    """
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError(
            f"tail_fraction must lie in (0, 1): got {tail_fraction}")
    mask = (curve.probability <= tail_fraction) & (curve.money > 0)
    m = curve.money[mask]
    p = curve.probability[mask]
    if m.shape[0] < 3:
        raise InsufficientPointsError(
            f"power-law fit needs >= 3 distinct positive tail values: "
            f"got {m.shape[0]}")
    slope, r_squared = _linear_fit(np.log(m), np.log(p))
    return FitResult(kind="power_law", parameter=-slope, r_squared=r_squared,
                     fit_range=(float(m[0]), float(m[-1])),
                     n_points=int(m.shape[0]))


def gini(money: np.ndarray) -> float:
    """Gini coefficient of a non-negative money vector.

    Sorted-vector formula, O(N log N):
        G = 2 * sum_k k*m_(k) / (N * sum(m)) - (N + 1) / N
    with m_(k) ascending and k starting at 1.  Ranges from 0 (all equal) to
    (N-1)/N (one agent holds everything).
    """
    money = np.asarray(money, dtype=np.float64)
    if money.ndim != 1 or money.shape[0] == 0:
        raise EmptyInputError("gini needs a non-empty one-dimensional vector")
    if not np.all(np.isfinite(money)) or np.any(money < 0):
        raise ValueError("money entries must be finite and non-negative")
    total = money.sum()
    if total == 0:
        raise EmptyInputError("gini undefined for an all-zero vector")
    n = money.shape[0]
    ordered = np.sort(money)
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(2.0 * np.sum(ranks * ordered) / (n * total) - (n + 1) / n)


@dataclass(frozen=True)
class RankProfile:
    """Agents ordered by final money, with their interaction balance."""

    order: np.ndarray      # agent indices, money descending, ties by index
    money: np.ndarray      # money along `order`
    net_wins: np.ndarray   # win_count - loss_count along `order`
    losses: np.ndarray     # loss_count along `order`

    def __len__(self) -> int:
        return self.order.shape[0]


def rank_profile(money: np.ndarray, win_count: np.ndarray,
                 loss_count: np.ndarray) -> RankProfile:
    """Sort agents by money descending (ties by ascending index)."""
    money = np.asarray(money, dtype=np.float64)
    win_count = np.asarray(win_count, dtype=np.int64)
    loss_count = np.asarray(loss_count, dtype=np.int64)
    if not money.shape == win_count.shape == loss_count.shape:
        raise ValueError("money, win_count, and loss_count lengths differ")
    order = np.argsort(-money, kind="stable")
    return RankProfile(order=order, money=money[order],
                       net_wins=(win_count - loss_count)[order],
                       losses=loss_count[order])


@dataclass(frozen=True)
class AnalysisResult:
    """Distribution summary of one finished run."""

    ccdf: Ccdf
    exponential_fit: FitResult | None
    power_law_fit: FitResult | None
    gini: float
    passive_agents: frozenset[int]
    never_losers: frozenset[int]
    richest_share: float            # largest balance / total money, all agents
    included_agents: int
    rank: RankProfile
    notes: tuple[str, ...] = ()


def analyze_output(output: SimulationOutput, exclude_passive: bool = True,
                   coverage: float = 0.9, tail_fraction: float = 0.1
                   ) -> AnalysisResult:
    """Standard analysis bundle for a simulation output.

    Passive agents are excluded from the CCDF, the fits, and the Gini
    coefficient unless `exclude_passive` is false.  Fits that cannot be
    computed (too few points in their window) are reported as None with a
    note, rather than failing the whole analysis.
    """
    money = output.final_ledger.money
    passive, never_losers = classify_agents(output.stats)
    excluded = passive if exclude_passive else frozenset()

    curve = ccdf(money, exclude=excluded)
    included = money.shape[0] - len(excluded)

    notes: list[str] = []
    exponential_fit = None
    power_law_fit = None
    try:
        exponential_fit = fit_exponential(curve, coverage=coverage)
    except InsufficientPointsError as err:
        notes.append(f"exponential fit skipped: {err}")
    try:
        power_law_fit = fit_power_law(curve, tail_fraction=tail_fraction)
    except InsufficientPointsError as err:
        notes.append(f"power-law fit skipped: {err}")

    mask = np.ones(money.shape[0], dtype=bool)
    for a in excluded:
        mask[a] = False
    gini_value = gini(money[mask])

    profile = rank_profile(money, output.stats.win_count,
                           output.stats.loss_count)
    return AnalysisResult(
        ccdf=curve,
        exponential_fit=exponential_fit,
        power_law_fit=power_law_fit,
        gini=gini_value,
        passive_agents=passive,
        never_losers=never_losers,
        richest_share=float(money.max() / money.sum()),
        included_agents=included,
        rank=profile,
        notes=tuple(notes))
