"""Bagged CART ensembles: the RF classifier and the regression forest used as a surrogate."""

from __future__ import annotations

import numpy as np

from .base import TrainedModel, TrainSet, check_params
from .tree import Tree, build_tree, n_split_features


def grow_forest(x, y, *, n_estimators, criterion, n_candidates, min_samples_split=2,
                min_samples_leaf=1, max_depth=None, rng) -> list[Tree]:
    """Grow `n_estimators` trees, each on a bootstrap resample of size ``len(y)``."""
    n = len(y)
    trees = []
    for child in rng.spawn(n_estimators):
        idx = child.integers(0, n, size=n)
        trees.append(build_tree(
            x[idx], y[idx], criterion=criterion, n_candidates=n_candidates,
            min_samples_split=min_samples_split, min_samples_leaf=min_samples_leaf,
            max_depth=max_depth, rng=child,
        ))
    return trees


class ForestModel(TrainedModel):
    family = "rf"

    def __init__(self, trees: list[Tree], n_features: int):
        self.trees = trees
        self.n_features = n_features

    def votes(self, features) -> np.ndarray:
        x = self._check(features)
        return np.sum([t.predict_value(x) for t in self.trees], axis=0)

    def predict(self, features) -> np.ndarray:
        # Strict majority; a tied vote goes to the non-defective class.
        return (2 * self.votes(features) > len(self.trees)).astype(np.int8)


def train_rf(data: TrainSet, params, rng: np.random.Generator, space=None) -> ForestModel:
    check_params(params, "rf", space)
    trees = grow_forest(
        data.features, data.labels,
        n_estimators=int(params["n_estimators"]),
        criterion=params["criterion"],
        n_candidates=n_split_features(params["max_features"], data.n_features, auto="sqrt"),
        min_samples_split=int(params["min_samples_split"]),
        min_samples_leaf=int(params["min_samples_leaf"]),
        rng=rng,
    )
    return ForestModel(trees, data.n_features)


class RegressionForest:
    """Leaf-mean regression forest exposing the per-tree spread of its predictions."""

    def __init__(self, n_estimators: int = 50, min_samples_leaf: int = 1):
        self.n_estimators = n_estimators
        self.min_samples_leaf = min_samples_leaf
        self.trees: list[Tree] = []

    def fit(self, x, y, rng: np.random.Generator) -> "RegressionForest":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self.trees = grow_forest(
            x, y, n_estimators=self.n_estimators, criterion="mse", n_candidates=None,
            min_samples_leaf=self.min_samples_leaf, rng=rng,
        )
        return self

    def predict_per_tree(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.stack([t.predict_value(x) for t in self.trees])

    def predict(self, x):
        """Return ``(mean, variance)`` across trees for each row of `x`."""
        per_tree = self.predict_per_tree(x)
        return per_tree.mean(axis=0), per_tree.var(axis=0)
