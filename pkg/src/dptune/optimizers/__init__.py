"""Hyperparameter tuners: default, grid, random, differential evolution and SMAC-style BO."""

from __future__ import annotations

import time

import numpy as np

from ..param_space import ParamSpace, default_setting
from .budget import Budget, BudgetError, Objective, TuningResult, run_budgeted
from .de import DEConfig, DEProposer, de_select, de_step, de_trials
from .search import GridProposer, RandomProposer, grid_proposer, random_proposer
from .smac import SmacConfig, SmacProposer, SurrogateState, expected_improvement, smac_propose

OPTIMIZERS = ("default", "grid", "random", "de", "smac")


def tune(kind: str, space: ParamSpace, objective: Objective, budget: Budget | None = None,
         rng: np.random.Generator | None = None, *, grid_points: int = 5,
         de: DEConfig | None = None, smac: SmacConfig | None = None) -> TuningResult:
    """Run one tuning search of the given `kind` and return its best setting."""
    budget = budget or Budget()
    rng = rng if rng is not None else np.random.default_rng()
    if kind == "default":
        start = time.perf_counter()
        setting = default_setting(space)
        s = objective(setting)
        return TuningResult(setting, s, 1, time.perf_counter() - start, [(1, s)], 1, "default")
    if kind == "grid":
        proposer = GridProposer(space, grid_points)
    elif kind == "random":
        proposer = RandomProposer(space, rng)
    elif kind == "de":
        proposer = DEProposer(space, rng, de or DEConfig(np=budget.round_size))
    elif kind == "smac":
        proposer = SmacProposer(space, rng, smac)
    else:
        raise ValueError(f"unknown optimizer {kind!r}; expected one of {OPTIMIZERS}")
    return run_budgeted(proposer, objective, budget)


__all__ = [
    "OPTIMIZERS", "Budget", "BudgetError", "DEConfig", "DEProposer", "GridProposer", "Objective",
    "RandomProposer", "SmacConfig", "SmacProposer", "SurrogateState", "TuningResult",
    "de_select", "de_step", "de_trials", "expected_improvement", "grid_proposer",
    "random_proposer", "run_budgeted", "smac_propose", "tune",
]
