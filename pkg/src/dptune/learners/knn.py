from __future__ import annotations

import numpy as np

from .base import LearnerError, Standardizer, TrainedModel, TrainSet, check_params


class KnnModel(TrainedModel):
    family = "knn"

    def __init__(self, data: TrainSet, k: int, weights: str):
        self.scaler = Standardizer(data.features)
        self.train_x = self.scaler.transform(data.features)
        self.train_y = np.asarray(data.labels)
        self.k = k
        self.weights = weights
        self.n_features = data.n_features

    def predict(self, features) -> np.ndarray:
        z = self.scaler.transform(self._check(features))
        diff = z[:, None, :] - self.train_x[None, :, :]
        d = np.sqrt(np.einsum("qtf,qtf->qt", diff, diff))
        # Stable sort: equal distances keep training-row order.
        nearest = np.argsort(d, axis=1, kind="stable")[:, : self.k]
        dist = np.take_along_axis(d, nearest, axis=1)
        labels = self.train_y[nearest]
        if self.weights == "uniform":
            w = np.ones_like(dist)
        else:
            exact = dist == 0
            with np.errstate(divide="ignore"):
                w = np.where(exact.any(axis=1, keepdims=True),
                             exact.astype(float), 1.0 / dist)
        pos = np.sum(w * (labels == 1), axis=1)
        neg = np.sum(w * (labels == 0), axis=1)
        return (pos > neg).astype(np.int8)


def train_knn(data: TrainSet, params, rng=None, space=None) -> KnnModel:
    check_params(params, "knn", space)
    k = int(params["n_neighbors"])
    if k > len(data):
        raise LearnerError(f"n_neighbors={k} exceeds the {len(data)} training rows")
    return KnnModel(data, k, params["weights"])
