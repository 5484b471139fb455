from __future__ import annotations

import numpy as np

from ..param_space import ParamSpace, grid, sample


class GridProposer:
    """Walks the full grid in enumeration order, one round-sized chunk at a time."""

    def __init__(self, space: ParamSpace, points_per_numeric_dim: int = 5):
        self.candidates = grid(space, points_per_numeric_dim)
        self.pos = 0

    def ask(self, n):
        chunk = self.candidates[self.pos:self.pos + n]
        self.pos += len(chunk)
        return chunk

    def tell(self, settings, scores):
        pass


class RandomProposer:
    """Endless stream of independent uniform samples."""

    def __init__(self, space: ParamSpace, rng: np.random.Generator):
        self.space = space
        self.rng = rng

    def ask(self, n):
        return [sample(self.space, self.rng) for _ in range(n)]

    def tell(self, settings, scores):
        pass


def grid_proposer(space, points_per_numeric_dim=5):
    return GridProposer(space, points_per_numeric_dim)


def random_proposer(space, rng):
    return RandomProposer(space, rng)
