"""Query-selection strategies operating under a hard per-window budget.

A window is W consecutive stream samples; at most B oracle queries may be
issued inside it.  Three selectors are provided:

* random   — B offsets pre-drawn uniformly per window; queries exactly there.
* memory   — stores the highest-scoring sample of the window and queries it
             when the window closes (only valid for B = 1).
* explorer — queries when the current score is likely to beat all but the
             remaining budget's worth of future scores in this window, using
             a running normal model of scores and a binomial tail test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BudgetState",
    "ExplorerStats",
    "QueryDecision",
    "RandomStrategy",
    "MemoryStrategy",
    "ExplorerStrategy",
    "make_strategy",
    "normal_cdf",
    "binomial_tail_below",
    "explorer_update",
    "explorer_decide",
    "STRATEGY_NAMES",
]

STRATEGY_NAMES = ("random", "memory", "explorer")


@dataclass
class BudgetState:
    """Remaining budget b and position t_p inside the current window."""

    B: int
    W: int

    def __post_init__(self):
        if self.W < 1:
            raise ValueError(f"window length must be >= 1, got {self.W}")
        if not 0 <= self.B <= self.W:
            raise ValueError(f"budget must satisfy 0 <= B <= W, got B={self.B}, W={self.W}")
        self.b = self.B
        self.t_p = 0

    def advance(self) -> None:
        """Account one processed sample."""
        self.t_p += 1

    @property
    def at_boundary(self) -> bool:
        return self.t_p == self.W

    def roll(self) -> None:
        """Start a new window: position 0, budget restored (no roll-over)."""
        if not self.at_boundary:
            raise ValueError("window roll before the window completed")
        self.t_p = 0
        self.b = self.B

    def spend(self) -> None:
        if self.b <= 0:
            raise ValueError("budget overdrawn")
        self.b -= 1


@dataclass
class ExplorerStats:
    """Running mean/variance of scores since the last query.

    The variance recursion below is the estimator used for the decision
    rule, not the exact batch sample variance.
    """

    n: int = 0
    mu: float = 0.0
    var: float = 0.0

    def reset(self) -> None:
        self.n, self.mu, self.var = 0, 0.0, 0.0


def explorer_update(stats: ExplorerStats, s_t: float) -> ExplorerStats:
    """Fold one score into the running statistics (in place)."""
    stats.n += 1
    inv_n = 1.0 / stats.n
    stats.mu = (1.0 - inv_n) * stats.mu + inv_n * s_t
    stats.var = (1.0 - inv_n) * stats.var + inv_n * (stats.mu - s_t) ** 2
    return stats


def normal_cdf(x: float, mu: float, var: float) -> float:
    """Normal CDF; degenerate (zero-variance) model is defined as 0.5."""
    if var <= 0.0:
        return 0.5
    return 0.5 * math.erfc((mu - x) / math.sqrt(2.0 * var))


def binomial_tail_below(b: int, n: int, p: float) -> float:
    """P[X < b] for X ~ Binomial(n, p), by direct summation."""
    total = 0.0
    for m in range(min(b, n + 1)):
        total += math.comb(n, m) * p**m * (1.0 - p) ** (n - m)
    return total


def explorer_decide(stats: ExplorerStats, budget: BudgetState, s_t: float) -> bool:
    """Query iff the chance that under b future scores beat s_t exceeds 1/2.

    The binomial counts score exceedances among the W - t_p samples still
    belonging to this window; on a positive decision the budget is spent
    and the running statistics reset.
    """
    if budget.b <= 0:
        return False
    F = normal_cdf(s_t, stats.mu, stats.var)
    if binomial_tail_below(budget.b, budget.W - budget.t_p, 1.0 - F) > 0.5:
        budget.spend()
        stats.reset()
        return True
    return False


@dataclass(frozen=True)
class QueryDecision:
    """What to ask the oracle, if anything, after one observed sample."""

    query: bool
    sample_id: int | None = None   # sample whose label is requested
    node_id: int | None = None     # node that will absorb the label

    @staticmethod
    def none() -> "QueryDecision":
        return QueryDecision(query=False)


class RandomStrategy:
    """Queries at B pre-drawn distinct offsets per window."""

    name = "random"

    def __init__(self, budget: BudgetState, rng: np.random.Generator):
        self.budget = budget
        self._rng = rng
        self._start_window()

    def _start_window(self) -> None:
        b = self.budget
        self._offsets = set(
            self._rng.choice(b.W, size=b.B, replace=False).tolist()
        )

    def observe(self, score: float, sample_id: int, winner: int) -> QueryDecision:
        if self.budget.t_p in self._offsets:
            self.budget.spend()
            return QueryDecision(True, sample_id, winner)
        return QueryDecision.none()

    def roll_window(self) -> None:
        self.budget.roll()
        self._start_window()


class MemoryStrategy:
    """Remembers the window's best-scoring sample; queries it at window end.

    The query targets the node the stored sample was integrated into when
    it was observed.  Only defined for B = 1.
    """

    name = "memory"

    def __init__(self, budget: BudgetState, rng: np.random.Generator):
        if budget.B != 1:
            raise ValueError(f"memory strategy requires B=1, got B={budget.B}")
        self.budget = budget
        self._best: tuple[float, int, int] | None = None  # (score, sample, node)

    def observe(self, score: float, sample_id: int, winner: int) -> QueryDecision:
        if self._best is None or score > self._best[0]:   # ties keep the earlier
            self._best = (score, sample_id, winner)
        if self.budget.t_p == self.budget.W - 1:
            _, sid, node = self._best
            self.budget.spend()
            self._best = None
            return QueryDecision(True, sid, node)
        return QueryDecision.none()

    def roll_window(self) -> None:
        self.budget.roll()


class ExplorerStrategy:
    """Score-adaptive selector; statistics persist across window boundaries."""

    name = "explorer"

    def __init__(self, budget: BudgetState, rng: np.random.Generator):
        self.budget = budget
        self.stats = ExplorerStats()

    def observe(self, score: float, sample_id: int, winner: int) -> QueryDecision:
        explorer_update(self.stats, score)
        if explorer_decide(self.stats, self.budget, score):
            return QueryDecision(True, sample_id, winner)
        return QueryDecision.none()

    def roll_window(self) -> None:
        self.budget.roll()   # stats deliberately survive the boundary


def make_strategy(name: str, budget: BudgetState, rng: np.random.Generator):
    table = {
        "random": RandomStrategy,
        "memory": MemoryStrategy,
        "explorer": ExplorerStrategy,
    }
    if name not in table:
        raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGY_NAMES}")
    return table[name](budget, rng)
