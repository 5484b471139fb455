"""Surrogate-based Bayesian optimization in the style of SMAC.

A leaf-mean random forest is fitted to the (encoded setting, score) history;
the mean and variance of the per-tree predictions give the posterior used by
expected improvement, which ranks a pool of random candidates.

Scores are modelled on a log scale, ``-log(1 - score + log_offset)``, which
keeps resolution where scores crowd near 1.  A round takes the highest-EI
candidates that are pairwise at least ``min_distance`` apart in encoded space
(Chebyshev), topping up by EI order when the pool has too few distinct ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from ..learners.forest import RegressionForest
from ..param_space import ParamSetting, ParamSpace, encode, sample


@dataclass(frozen=True)
class SmacConfig:
    initial_design: int = 10
    n_trees: int = 50
    min_samples_leaf: int = 1
    pool_size: int = 1000
    xi: float = 0.01
    log_offset: float = 1e-4
    min_distance: float = 0.02


@dataclass
class SurrogateState:
    config: SmacConfig = field(default_factory=SmacConfig)
    history_x: list = field(default_factory=list)
    history_y: list = field(default_factory=list)
    surrogate: RegressionForest | None = None
    last_ei: np.ndarray | None = None

    def add(self, space: ParamSpace, settings, scores):
        for s, y in zip(settings, scores):
            if not np.isfinite(y):
                raise ValueError(f"non-finite score {y!r} for {s}")
            self.history_x.append(encode(space, s))
            self.history_y.append(float(y))


def expected_improvement(mu, sigma, best: float, xi: float = 0.01) -> np.ndarray:
    """EI for maximization; reduces to ``max(0, mu - best - xi)`` where sigma is 0."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    gain = mu - best - xi
    out = np.maximum(gain, 0.0)
    pos = sigma > 0
    z = gain[pos] / sigma[pos]
    pdf = np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi)
    out[pos] = gain[pos] * ndtr(z) + sigma[pos] * pdf
    return np.maximum(out, 0.0)


def surrogate_target(scores, log_offset: float = 1e-4) -> np.ndarray:
    """Monotone map of [0, 1] scores onto an unbounded log scale."""
    y = np.asarray(scores, dtype=float)
    return -np.log(np.maximum(1.0 - y, 0.0) + log_offset)


def select_diverse(enc: np.ndarray, ei: np.ndarray, k: int, min_distance: float) -> list[int]:
    """Indices of up to `k` high-EI rows, preferring rows `min_distance` apart."""
    order = np.argsort(-ei, kind="stable")
    picked: list[int] = []
    for i in order:
        if len(picked) == k:
            break
        if not picked or np.abs(enc[picked] - enc[i]).max(axis=1).min() >= min_distance:
            picked.append(int(i))
    if len(picked) < k:
        chosen = set(picked)
        picked += [int(i) for i in order if int(i) not in chosen][: k - len(picked)]
    return picked


def smac_propose(state: SurrogateState, space: ParamSpace, round_size: int,
                 rng: np.random.Generator) -> list[ParamSetting]:
    cfg = state.config
    if len(state.history_y) < cfg.initial_design:
        return [sample(space, rng) for _ in range(round_size)]
    x = np.array(state.history_x)
    y = surrogate_target(state.history_y, cfg.log_offset)
    state.surrogate = RegressionForest(cfg.n_trees, cfg.min_samples_leaf).fit(x, y, rng)
    pool = [sample(space, rng) for _ in range(cfg.pool_size)]
    enc = np.array([encode(space, s) for s in pool])
    mu, var = state.surrogate.predict(enc)
    ei = expected_improvement(mu, np.sqrt(var), float(y.max()), cfg.xi)
    state.last_ei = ei
    # Equal EI keeps pool order.
    return [pool[i] for i in select_diverse(enc, ei, round_size, cfg.min_distance)]


class SmacProposer:
    def __init__(self, space: ParamSpace, rng: np.random.Generator, cfg: SmacConfig | None = None):
        self.space = space
        self.rng = rng
        self.state = SurrogateState(cfg or SmacConfig())

    def ask(self, n):
        return smac_propose(self.state, self.space, n, self.rng)

    def tell(self, settings, scores):
        self.state.add(self.space, settings, scores)
