"""Binary decision trees (CART) for classification and leaf-mean regression."""

from __future__ import annotations

import numpy as np
from numba import njit

from ..param_space import AUTO
from .base import LearnerError, TrainedModel, TrainSet, check_params, majority

CRITERIA = ("gini", "entropy", "mse")


class Tree:
    """Array-backed binary tree.  ``feature[i] == -1`` marks a leaf.

    Samples with ``x[feature] <= threshold`` go to the left child.
    """

    def __init__(self, feature, threshold, left, right, value, n_samples, depth):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)
        self.n_samples = np.asarray(n_samples, dtype=np.intp)
        self.node_depth = np.asarray(depth, dtype=np.intp)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        return int(self.node_depth.max())

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Index of the leaf reached by each row of `x`."""
        return _apply(np.ascontiguousarray(x, dtype=np.float64), self.feature,
                      self.threshold, self.left, self.right)

    def predict_value(self, x: np.ndarray) -> np.ndarray:
        return self.value[self.apply(x)]


@njit(cache=True)
def _apply(x, feature, threshold, left, right):
    out = np.empty(x.shape[0], np.int64)
    for r in range(x.shape[0]):
        node = 0
        while feature[node] >= 0:
            if x[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


_GINI, _ENTROPY, _MSE = 0, 1, 2
_CODES = {"gini": _GINI, "entropy": _ENTROPY, "mse": _MSE}


@njit(cache=True)
def _h(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p))


@njit(cache=True)
def _split_cost(crit, nl, sl, ssl, nr, sr, ssr):
    if crit == _MSE:
        return (ssl - sl * sl / nl) + (ssr - sr * sr / nr)
    pl = sl / nl
    pr = sr / nr
    if crit == _GINI:
        return nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr)
    return nl * _h(pl) + nr * _h(pr)


@njit(cache=True)
def _grow(x, y, crit, n_cand, min_split, min_leaf, max_depth, seed):
    # max_depth < 0 means unbounded.  Ties keep the first candidate feature and
    # the smallest threshold (strict improvement only).  order[f, lo:hi] holds
    # the node's rows sorted by feature f; splits partition every row stably.
    np.random.seed(seed)
    n, m = x.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap)
    count = np.zeros(cap, np.int64)
    depth = np.zeros(cap, np.int64)
    order = np.empty((m, n), np.int64)
    for f in range(m):
        order[f] = np.argsort(x[:, f], kind="mergesort")
    goes_left = np.zeros(n, np.bool_)
    buf = np.empty(n, np.int64)
    st_node = np.empty(cap, np.int64)
    st_lo = np.empty(cap, np.int64)
    st_hi = np.empty(cap, np.int64)
    all_feat = np.arange(m)

    count[0] = n
    value[0] = _leaf_value(y, order[0], 0, n, crit)
    n_nodes = 1
    st_node[0], st_lo[0], st_hi[0] = 0, 0, n
    sp = 1
    while sp > 0:
        sp -= 1
        node, lo, hi = st_node[sp], st_lo[sp], st_hi[sp]
        cnt = hi - lo
        if cnt < min_split:
            continue
        if max_depth >= 0 and depth[node] >= max_depth:
            continue
        rows = order[0]
        pure = True
        y0 = y[rows[lo]]
        s_tot = 0.0
        ss_tot = 0.0
        for r in range(lo, hi):
            v = y[rows[r]]
            if v != y0:
                pure = False
            s_tot += v
            ss_tot += v * v
        if pure:
            continue
        if n_cand < m:
            cand = np.random.permutation(m)[:n_cand]
        else:
            cand = all_feat
        best = np.inf
        best_f = -1
        best_a = 0.0
        best_b = 0.0
        for f in cand:
            seg = order[f]
            sl = 0.0
            ssl = 0.0
            for p in range(lo, hi - 1):
                v = y[seg[p]]
                sl += v
                ssl += v * v
                nl = p - lo + 1
                nr = cnt - nl
                if nl < min_leaf:
                    continue
                if nr < min_leaf:
                    break
                a = x[seg[p], f]
                b = x[seg[p + 1], f]
                if not a < b:
                    continue
                cost = _split_cost(crit, float(nl), sl, ssl, float(nr), s_tot - sl, ss_tot - ssl)
                if cost < best:
                    best = cost
                    best_f = f
                    best_a = a
                    best_b = b
        if best_f < 0:
            continue
        best_thr = 0.5 * (best_a + best_b)
        if not (best_a <= best_thr and best_thr < best_b):
            best_thr = best_a
        n_left = 0
        for r in range(lo, hi):
            row = order[best_f, r]
            flag = x[row, best_f] <= best_thr
            goes_left[row] = flag
            if flag:
                n_left += 1
        for f in range(m):
            seg = order[f]
            a = lo
            b = 0
            for r in range(lo, hi):
                row = seg[r]
                if goes_left[row]:
                    seg[a] = row
                    a += 1
                else:
                    buf[b] = row
                    b += 1
            for r in range(b):
                seg[a + r] = buf[r]
        mid = lo + n_left
        feature[node] = best_f
        threshold[node] = best_thr
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        left[node] = lc
        right[node] = rc
        count[lc] = n_left
        count[rc] = hi - mid
        depth[lc] = depth[node] + 1
        depth[rc] = depth[node] + 1
        value[lc] = _leaf_value(y, order[0], lo, mid, crit)
        value[rc] = _leaf_value(y, order[0], mid, hi, crit)
        # Right pushed first so the left subtree is grown first.
        st_node[sp], st_lo[sp], st_hi[sp] = rc, mid, hi
        sp += 1
        st_node[sp], st_lo[sp], st_hi[sp] = lc, lo, mid
        sp += 1
    k = n_nodes
    return (feature[:k], threshold[:k], left[:k], right[:k], value[:k], count[:k], depth[:k])


@njit(cache=True)
def _leaf_value(y, rows, lo, hi, crit):
    s = 0.0
    for r in range(lo, hi):
        s += y[rows[r]]
    k = hi - lo
    if crit == _MSE:
        return s / k
    return 1.0 if 2.0 * s > k else 0.0


def build_tree(x: np.ndarray, y: np.ndarray, *, criterion: str = "gini",
               n_candidates: int | None = None, min_samples_split: int = 2,
               min_samples_leaf: int = 1, max_depth: int | None = None,
               rng: np.random.Generator | None = None) -> Tree:
    """Grow a tree depth-first.

    Split candidates are midpoints between consecutive distinct feature values
    that keep at least `min_samples_leaf` samples on each side; the split with
    the lowest weighted child impurity wins, even when it does not lower the
    parent impurity.  `n_candidates` features are drawn uniformly without
    replacement at each node (all features when None).  Classification leaves
    hold the majority class (ties -> 0), regression (``criterion="mse"``)
    leaves the mean target.
    """
    if criterion not in CRITERIA:
        raise LearnerError(f"unknown criterion {criterion!r}")
    n_features = x.shape[1]
    subsample = n_candidates is not None and n_candidates < n_features
    if subsample and rng is None:
        raise LearnerError("feature subsampling needs a random generator")
    seed = int(rng.integers(2**31)) if subsample else 0
    arrays = _grow(
        np.ascontiguousarray(x, dtype=np.float64), np.ascontiguousarray(y, dtype=np.float64),
        _CODES[criterion], n_candidates if subsample else n_features,
        int(min_samples_split), int(min_samples_leaf),
        -1 if max_depth is None else int(max_depth), seed,
    )
    return Tree(*arrays)


def n_split_features(max_features, n_features: int, auto: str = "all") -> int:
    """Features examined per split for a fractional `max_features`."""
    if max_features is AUTO or max_features is None:
        if auto == "sqrt":
            return max(1, int(np.floor(np.sqrt(n_features) + 0.5)))
        return n_features
    return max(1, min(n_features, int(np.floor(max_features * n_features + 0.5))))


class CartModel(TrainedModel):
    family = "cart"

    def __init__(self, tree: Tree, n_features: int):
        self.tree = tree
        self.n_features = n_features

    def predict(self, features) -> np.ndarray:
        x = self._check(features)
        return self.tree.predict_value(x).astype(np.int8)


def train_cart(data: TrainSet, params, rng: np.random.Generator, space=None) -> CartModel:
    check_params(params, "cart", space)
    max_depth = params["max_depth"]
    tree = build_tree(
        data.features, data.labels,
        criterion=params["criterion"],
        n_candidates=n_split_features(params["max_features"], data.n_features),
        min_samples_split=int(params["min_samples_split"]),
        min_samples_leaf=int(params["min_samples_leaf"]),
        max_depth=None if max_depth is AUTO else int(max_depth),
        rng=rng,
    )
    return CartModel(tree, data.n_features)
