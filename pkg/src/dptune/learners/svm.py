"""Soft-margin kernel SVM trained by sequential minimal optimization.

Working pairs are chosen by the maximal-violating-pair rule on the dual
gradient; training stops once the violation drops below ``tol`` or after
``max_iter`` pair updates.
"""

from __future__ import annotations

import numpy as np

from ..param_space import AUTO
from .base import LearnerError, Standardizer, TrainedModel, TrainSet, check_params

TOL = 1e-3
MAX_ITER = 10_000
_TAU = 1e-12


def kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: str, gamma: float, coef0: float):
    if kernel == "rbf":
        diff = a[:, None, :] - b[None, :, :]
        return np.exp(-gamma * np.einsum("ijk,ijk->ij", diff, diff))
    if kernel == "sigmoid":
        return np.tanh(gamma * (a @ b.T) + coef0)
    raise LearnerError(f"unknown kernel {kernel!r}")


def _violation_sets(alpha, y, c):
    up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
    return up, low


def smo(k: np.ndarray, y: np.ndarray, c: float, tol: float = TOL, max_iter: int = MAX_ITER):
    """Solve the SVM dual for labels ``y`` in {-1, +1}.

    Returns ``(alpha, bias, gap, iterations)`` where `gap` is the final
    maximal KKT violation ``max_up(-y*G) - min_low(-y*G)``.
    """
    n = len(y)
    q = (y[:, None] * y[None, :]) * k
    qd = np.diag(q).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    gap = np.inf
    while True:
        up, low = _violation_sets(alpha, y, c)
        score = -y * grad
        gmax = np.where(up, score, -np.inf)
        gmin = np.where(low, score, np.inf)
        i = int(np.argmax(gmax))
        j = int(np.argmin(gmin))
        gap = gmax[i] - gmin[j]
        if gap < tol or it >= max_iter:
            break
        it += 1
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(qd[i] + qd[j] + 2 * q[i, j], _TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > c:
                    ni, nj = c, c - diff
            elif nj > c:
                nj, ni = c, c + diff
        else:
            quad = max(qd[i] + qd[j] - 2 * q[i, j], _TAU)
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > c:
                if ni > c:
                    ni, nj = c, total - c
            elif nj < 0:
                nj, ni = 0.0, total
            if total > c:
                if nj > c:
                    nj, ni = c, total - c
            elif ni < 0:
                ni, nj = 0.0, total
        grad += q[:, i] * (ni - ai) + q[:, j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
    bias = _bias(alpha, y, grad, c)
    return alpha, bias, float(gap), it


def _bias(alpha, y, grad, c):
    yg = y * grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        rho = yg[free].mean()
    else:
        up, low = _violation_sets(alpha, y, c)
        ub = np.min(yg[up]) if up.any() else np.inf
        lb = np.max(yg[low]) if low.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub + lb) else 0.0
    return -float(rho)


class SvmModel(TrainedModel):
    family = "svm"

    def __init__(self, scaler, support, coef, bias, kernel, gamma, coef0, c, alpha, gap, iterations):
        self.scaler = scaler
        self.support = support
        self.coef = coef
        self.bias = bias
        self.kernel = kernel
        self.gamma = gamma
        self.coef0 = coef0
        self.C = c
        self.alpha = alpha
        self.kkt_gap = gap
        self.iterations = iterations
        self.n_features = support.shape[1]

    def decision_function(self, features) -> np.ndarray:
        z = self.scaler.transform(self._check(features))
        if not len(self.coef):
            return np.full(len(z), self.bias)
        k = kernel_matrix(z, self.support, self.kernel, self.gamma, self.coef0)
        return k @ self.coef + self.bias

    def predict(self, features) -> np.ndarray:
        return (self.decision_function(features) > 0).astype(np.int8)


def train_svm(data: TrainSet, params, rng=None, space=None, tol: float = TOL,
              max_iter: int = MAX_ITER) -> SvmModel:
    check_params(params, "svm", space)
    if np.unique(data.labels).size < 2:
        raise LearnerError("SVM training needs both classes present")
    gamma = params["gamma"]
    gamma = 1.0 / data.n_features if gamma is AUTO else float(gamma)
    c = float(params["C"])
    kernel = params["kernel"]
    coef0 = float(params["coef0"])
    scaler = Standardizer(data.features)
    z = scaler.transform(data.features)
    y = np.where(data.labels == 1, 1.0, -1.0)
    k = kernel_matrix(z, z, kernel, gamma, coef0)
    alpha, bias, gap, it = smo(k, y, c, tol=tol, max_iter=max_iter)
    sv = alpha > 0
    return SvmModel(scaler, z[sv], (alpha * y)[sv], bias, kernel, gamma, coef0, c,
                    alpha, gap, it)
