"""Differential evolution (DE/rand/1/bin) over mixed parameter spaces.

Numeric coordinates mutate as ``a + f * (b - c)`` and are clipped to their
range (integers rounded first).  Categorical coordinates use the same
arithmetic on value indices, rounded and clipped to a legal index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..param_space import CATEGORICAL, INTEGER, ParamSetting, ParamSpace, sample


@dataclass(frozen=True)
class DEConfig:
    np: int = 10
    f: float = 0.75
    cr: float = 0.3

    def __post_init__(self):
        if self.np < 4:
            raise ValueError("DE needs a population of at least 4")
        # f = 0 is accepted: it degenerates to copying donor a.
        if not 0 <= self.f <= 2:
            raise ValueError("f must lie in [0, 2]")
        if not 0 <= self.cr <= 1:
            raise ValueError("cr must lie in [0, 1]")


def _round(v: float) -> int:
    return int(math.floor(v + 0.5))


def _mutate(dim, a, b, c, f):
    if dim.kind == CATEGORICAL:
        idx = [dim.values.index(v) for v in (a, b, c)]
        j = _round(idx[0] + f * (idx[1] - idx[2]))
        return dim.values[min(len(dim.values) - 1, max(0, j))]
    v = a + f * (b - c)
    if dim.kind == INTEGER:
        return int(min(dim.hi, max(dim.lo, _round(v))))
    return float(min(dim.hi, max(dim.lo, v)))


def de_trials(population, cfg: DEConfig, space: ParamSpace, rng: np.random.Generator):
    """One trial per population member, all built from the current generation."""
    members = [s for s, _ in population]
    n = len(members)
    if n < 4:
        raise ValueError("DE needs a population of at least 4")
    trials = []
    for i, target in enumerate(members):
        others = [j for j in range(n) if j != i]
        ia, ib, ic = rng.choice(others, size=3, replace=False)
        a, b, c = members[ia], members[ib], members[ic]
        forced = int(rng.integers(len(space.dims)))
        vals = {}
        for k, dim in enumerate(space.dims):
            if k == forced or rng.random() < cfg.cr:
                vals[dim.name] = _mutate(dim, a[dim.name], b[dim.name], c[dim.name], cfg.f)
            else:
                vals[dim.name] = target[dim.name]
        trials.append(ParamSetting(vals))
    return trials


def de_select(population, trials, scores):
    """A trial replaces its target when it scores at least as well."""
    out = list(population)
    for i, (trial, s) in enumerate(zip(trials, scores)):
        if s >= out[i][1]:
            out[i] = (trial, s)
    return out


def de_step(population, cfg: DEConfig, space: ParamSpace, objective, rng):
    """Build, evaluate and select one DE generation."""
    if cfg.np < 4 or len(population) < 4:
        raise ValueError("DE needs a population of at least 4")
    trials = de_trials(population, cfg, space, rng)
    return de_select(population, trials, [objective(t) for t in trials])


class DEProposer:
    """First round is the random initial population; later rounds are trial generations.

    A generation counts as progress when some trial beats the member it
    competes against by more than the budget's epsilon, rather than only when
    the global best moves.
    """

    def __init__(self, space: ParamSpace, rng: np.random.Generator, cfg: DEConfig | None = None):
        self.space = space
        self.rng = rng
        self.cfg = cfg or DEConfig()
        self.population: list[tuple[ParamSetting, float]] = []
        self._pending: list[ParamSetting] = []
        self._gain = 0.0

    def ask(self, n):
        if not self.population:
            self._pending = [sample(self.space, self.rng) for _ in range(self.cfg.np)]
        else:
            self._pending = de_trials(self.population, self.cfg, self.space, self.rng)
        return list(self._pending)

    def tell(self, settings, scores):
        if not self.population:
            self._gain = 0.0
            self.population = list(zip(settings, scores))
            if len(self.population) < 4:
                self.population = []
        else:
            self._gain = max((s - old for s, (_, old) in zip(scores, self.population)),
                             default=0.0)
            self.population = de_select(self.population, settings, scores)

    def round_improved(self, prev_best, scores, epsilon) -> bool:
        return self._gain > epsilon
