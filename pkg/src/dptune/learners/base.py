from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..param_space import ParamSpace, SpaceError, builtin_space


class LearnerError(ValueError):
    """Raised when a learner cannot be trained with the given data or parameters."""


@dataclass(frozen=True)
class TrainSet:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        # Copies, so freezing them never touches the caller's arrays.
        x = np.array(self.features, dtype=float)
        y = np.array(self.labels).astype(np.int8)
        if x.ndim != 2:
            raise LearnerError("features must be a 2-d matrix")
        if len(x) != len(y):
            raise LearnerError(f"{len(x)} feature rows but {len(y)} labels")
        if len(x) == 0:
            raise LearnerError("training set is empty")
        if not np.all(np.isfinite(x)):
            raise LearnerError("features contain missing or non-finite values")
        if np.any((y != 0) & (y != 1)):
            raise LearnerError("labels must be binary")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "TrainSet":
        return TrainSet(self.features[idx], self.labels[idx])


class TrainedModel:
    """A fitted binary classifier; ``predict`` returns 0/1 labels."""

    family: str = ""
    n_features: int = 0

    def predict(self, features) -> np.ndarray:
        raise NotImplementedError

    def _check(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.n_features:
            raise LearnerError(f"expected {self.n_features} features, got {x.shape[1]}")
        return x


class Standardizer:
    """Per-feature z-scoring fitted on training data; constant columns map to 0."""

    def __init__(self, features: np.ndarray):
        self.mean = features.mean(axis=0)
        std = features.std(axis=0)
        self.scale = np.where(std > 0, std, 1.0)
        self.constant = std == 0

    def transform(self, features: np.ndarray) -> np.ndarray:
        z = (features - self.mean) / self.scale
        z[:, self.constant] = 0.0
        return z


def check_params(params, family: str, space: ParamSpace | None):
    space = space if space is not None else builtin_space(family)
    try:
        space.validate(params, allow_defaults=True)
    except SpaceError as exc:
        raise LearnerError(str(exc)) from None
    return space


def majority(labels: np.ndarray) -> int:
    """Majority class with ties going to the non-defective class."""
    pos = int(np.sum(labels))
    return 1 if 2 * pos > len(labels) else 0
