"""Round-based budget control shared by every tuner.

A proposer hands out rounds of candidates and may learn from their scores.
A round that lifts the best score by more than ``improvement_epsilon`` restores
all lives; any other round costs one life.  The opening round only establishes
a baseline, so it always costs a life.  A proposer may define its own notion
of progress through a ``round_improved(prev_best, scores, epsilon)`` method.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

from ..param_space import ParamSetting


class Proposer(Protocol):
    def ask(self, n: int) -> list[ParamSetting]:
        """Next round of up to `n` candidates; an empty list means exhausted."""

    def tell(self, settings: list[ParamSetting], scores: list[float]) -> None:
        """Report the scores of (a prefix of) the last round."""


class Objective:
    """Counts evaluations of a setting -> score function (higher is better)."""

    def __init__(self, fn: Callable[[ParamSetting], float]):
        self.fn = fn
        self.calls = 0

    def __call__(self, setting: ParamSetting) -> float:
        self.calls += 1
        return float(self.fn(setting))


@dataclass(frozen=True)
class Budget:
    lives: int = 5
    max_wall_time: float = 3600.0
    round_size: int = 10
    improvement_epsilon: float = 1e-4

    def __post_init__(self):
        if self.lives < 1:
            raise ValueError("lives must be >= 1")
        if self.round_size < 1:
            raise ValueError("round_size must be >= 1")
        if not self.max_wall_time > 0:
            raise ValueError("max_wall_time must be positive")


@dataclass
class TuningResult:
    best_setting: ParamSetting
    best_score: float
    evaluations_used: int
    wall_time: float
    trajectory: list[tuple[int, float]] = field(default_factory=list)
    rounds: int = 0
    stop_reason: str = ""

    def evaluations_to_reach(self, threshold: float) -> float:
        """Evaluation index at which the best score first reached `threshold` (inf if never)."""
        for i, s in self.trajectory:
            if s >= threshold:
                return i
        return float("inf")


class BudgetError(ValueError):
    pass


def run_budgeted(proposer: Proposer, objective: Objective, budget: Budget) -> TuningResult:
    start = time.perf_counter()
    calls0 = objective.calls
    best_setting, best = None, float("-inf")
    lives = budget.lives
    trajectory: list[tuple[int, float]] = []
    rounds = 0
    reason = "lives"
    while lives > 0:
        if rounds and time.perf_counter() - start >= budget.max_wall_time:
            reason = "time"
            break
        batch = proposer.ask(budget.round_size)
        if not batch:
            if not rounds:
                raise BudgetError("proposer yielded no candidates")
            reason = "exhausted"
            break
        prev_best = best
        scores: list[float] = []
        timed_out = False
        for setting in batch:
            # Never abort an in-flight evaluation; check only between them.
            if (scores or rounds) and time.perf_counter() - start >= budget.max_wall_time:
                timed_out = True
                break
            s = objective(setting)
            scores.append(s)
            if s > best:
                best, best_setting = s, setting
            trajectory.append((objective.calls - calls0, best))
        rounds += 1
        proposer.tell(batch[: len(scores)], scores)
        if timed_out:
            reason = "time"
            break
        judge = getattr(proposer, "round_improved", None)
        if judge is not None:
            improved = judge(prev_best, scores, budget.improvement_epsilon)
        else:
            improved = max(scores) > prev_best + budget.improvement_epsilon
        if rounds > 1 and improved:
            lives = budget.lives
        else:
            lives -= 1
    return TuningResult(
        best_setting=best_setting, best_score=best,
        evaluations_used=objective.calls - calls0,
        wall_time=time.perf_counter() - start,
        trajectory=trajectory, rounds=rounds, stop_reason=reason,
    )
