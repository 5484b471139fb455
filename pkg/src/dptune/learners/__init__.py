"""From-scratch defect classifiers: CART, random forest, KNN and kernel SVM."""

from __future__ import annotations

from .base import LearnerError, Standardizer, TrainedModel, TrainSet
from .forest import ForestModel, RegressionForest, train_rf
from .knn import KnnModel, train_knn
from .svm import SvmModel, train_svm
from .tree import CartModel, Tree, build_tree, train_cart

_TRAINERS = {"cart": train_cart, "rf": train_rf, "knn": train_knn, "svm": train_svm}
FAMILIES = tuple(_TRAINERS)


def train(family: str, data: TrainSet, params, rng=None, space=None) -> TrainedModel:
    """Fit the learner `family` with hyperparameters `params`."""
    try:
        trainer = _TRAINERS[family]
    except KeyError:
        raise LearnerError(f"unknown learner {family!r}; expected one of {FAMILIES}") from None
    return trainer(data, params, rng, space=space)


def warm_up() -> None:
    """Compile (or load) the jitted kernels so the first timed fit does not pay for it."""
    import numpy as np

    from ..param_space import builtin_space, default_setting

    rng = np.random.default_rng(0)
    x = rng.normal(size=(12, 3))
    data = TrainSet(x, np.arange(12) % 2)
    for family in FAMILIES:
        model = train(family, data, default_setting(builtin_space(family)), rng)
        model.predict(x)
    RegressionForest(n_estimators=2).fit(x, x[:, 0], rng).predict(x)


__all__ = [
    "FAMILIES", "CartModel", "ForestModel", "KnnModel", "LearnerError", "RegressionForest",
    "Standardizer", "SvmModel", "TrainSet", "TrainedModel", "Tree", "build_tree", "train",
    "train_cart", "train_knn", "train_rf", "train_svm", "warm_up",
]
