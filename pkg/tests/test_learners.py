import numpy as np
import pytest

from dptune.learners import (
    LearnerError, RegressionForest, Standardizer, TrainSet, build_tree, train, warm_up,
)
from dptune.learners.svm import kernel_matrix, smo
from dptune.learners.tree import n_split_features
from dptune.param_space import AUTO, ParamSetting, builtin_space, default_setting, sample

from conftest import blobs


def defaults(family, **kw):
    return default_setting(builtin_space(family)).replace(**kw)


def best_split_oracle(x, y, criterion="gini", min_leaf=1):
    """Exhaustive root split: every feature, every midpoint between distinct values."""
    def impurity(labels):
        if len(labels) == 0:
            return 0.0
        p = labels.mean()
        if criterion == "gini":
            return 2 * p * (1 - p)
        if p in (0.0, 1.0):
            return 0.0
        return -(p * np.log2(p) + (1 - p) * np.log2(1 - p))

    best = (np.inf, None, None)
    for f in range(x.shape[1]):
        vals = np.unique(x[:, f])
        for a, b in zip(vals[:-1], vals[1:]):
            thr = (a + b) / 2
            left = y[x[:, f] <= thr]
            right = y[x[:, f] > thr]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            cost = len(left) * impurity(left) + len(right) * impurity(right)
            if cost < best[0] - 1e-12:
                best = (cost, f, thr)
    return best[1], best[2]


# -- CART --------------------------------------------------------------------

@pytest.mark.parametrize("criterion", ["gini", "entropy"])
@pytest.mark.parametrize("seed", range(8))
def test_root_split_matches_brute_force(seed, criterion):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(40, 5))
    y = (x[:, 2] + 0.5 * rng.normal(size=40) > 0).astype(int)
    tree = build_tree(x, y, criterion=criterion, max_depth=1)
    f, thr = best_split_oracle(x, y, criterion)
    assert tree.feature[0] == f
    assert tree.threshold[0] == pytest.approx(thr)


def test_root_split_respects_min_leaf():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(30, 3))
    y = (x[:, 0] > 1.2).astype(int)
    tree = build_tree(x, y, max_depth=1, min_samples_leaf=8)
    f, thr = best_split_oracle(x, y, "gini", min_leaf=8)
    assert (tree.feature[0], tree.threshold[0]) == (f, pytest.approx(thr))


def test_single_class_is_one_leaf():
    data = TrainSet(np.random.default_rng(0).normal(size=(20, 3)), np.ones(20))
    model = train("cart", data, defaults("cart"), np.random.default_rng(0))
    assert model.tree.n_nodes == 1
    assert np.all(model.predict(data.features) == 1)


def test_xor_is_learned_exactly():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    data = TrainSet(x, y)
    model = train("cart", data, defaults("cart", max_features=1.0), np.random.default_rng(0))
    assert np.array_equal(model.predict(x), y)


def test_min_samples_split_forces_root_leaf():
    x = np.arange(10, dtype=float)[:, None]
    y = np.array([1, 1, 1, 0, 0, 0, 0, 1, 1, 1])
    data = TrainSet(x, y)
    model = train("cart", data, defaults("cart", min_samples_split=30), np.random.default_rng(0))
    assert model.tree.n_nodes == 1
    assert np.all(model.predict(x) == 1)


def test_leaf_ties_go_to_non_defective():
    x = np.zeros((4, 1))
    model = train("cart", TrainSet(x, [0, 1, 0, 1]), defaults("cart"), np.random.default_rng(0))
    assert np.all(model.predict(x) == 0)


@pytest.mark.parametrize("seed", range(5))
def test_tree_constraints_hold(seed):
    rng = np.random.default_rng(seed)
    data = blobs(80, 6, seed, shift=0.6)
    params = sample(builtin_space("cart"), rng)
    tree = train("cart", data, params, rng).tree
    for node in range(tree.n_nodes):
        if tree.is_leaf(node):
            assert tree.n_samples[node] >= params["min_samples_leaf"]
        else:
            assert tree.n_samples[node] >= params["min_samples_split"]
    assert tree.depth <= params["max_depth"]


def test_monotone_transform_leaves_tree_predictions_unchanged():
    data = blobs(60, 3, 4, shift=0.8)
    params = defaults("cart", max_depth=4)
    x2 = np.column_stack([np.exp(data.features[:, 0]), data.features[:, 1] ** 3,
                          3 * data.features[:, 2] + 1])
    a = train("cart", data, params, np.random.default_rng(0))
    b = train("cart", TrainSet(x2, data.labels), params, np.random.default_rng(0))
    assert np.array_equal(a.predict(data.features), b.predict(x2))


def test_n_split_features_rules():
    assert n_split_features(AUTO, 20) == 20
    assert n_split_features(AUTO, 20, auto="sqrt") == 4
    assert n_split_features(0.1, 20) == 2
    assert n_split_features(0.01, 20) == 1
    assert n_split_features(1.0, 20) == 20


def test_feature_subsampling_is_seeded():
    data = blobs(60, 8, 2, shift=0.5)
    params = defaults("cart", max_features=0.3)
    p1 = train("cart", data, params, np.random.default_rng(5)).predict(data.features)
    p2 = train("cart", data, params, np.random.default_rng(5)).predict(data.features)
    assert np.array_equal(p1, p2)


def test_regression_tree_means():
    x = np.arange(8, dtype=float)[:, None]
    y = np.array([1.0, 1.0, 1.0, 1.0, 5.0, 5.0, 5.0, 5.0])
    tree = build_tree(x, y, criterion="mse")
    assert tree.feature[0] == 0 and tree.threshold[0] == pytest.approx(3.5)
    assert np.allclose(tree.predict_value(x), y)


# -- RF ----------------------------------------------------------------------

def test_rf_single_class():
    data = TrainSet(np.random.default_rng(1).normal(size=(15, 3)), np.zeros(15))
    model = train("rf", data, defaults("rf"), np.random.default_rng(0))
    assert len(model.trees) == 10
    assert np.all(model.predict(np.random.default_rng(2).normal(size=(30, 3))) == 0)


def test_rf_deterministic():
    data = blobs(50, 5, 3, shift=0.7)
    probe = np.random.default_rng(9).normal(size=(40, 5))
    params = defaults("rf", n_estimators=15, max_features=0.5)
    a = train("rf", data, params, np.random.default_rng(4)).predict(probe)
    b = train("rf", data, params, np.random.default_rng(4)).predict(probe)
    assert np.array_equal(a, b)


def test_rf_vote_ties_go_to_zero():
    from dptune.learners import ForestModel
    from dptune.learners.tree import Tree

    one = Tree([-1], [0.0], [-1], [-1], [1.0], [1], [0])
    zero = Tree([-1], [0.0], [-1], [-1], [0.0], [1], [0])
    model = ForestModel([one, zero], 1)
    assert model.predict(np.zeros((3, 1))).tolist() == [0, 0, 0]


def test_rf_fits_training_data_at_least_as_well_as_cart_out_of_bag(corpus):
    # Regression value measured on the alpha fixture release with fixed seeds.
    data = corpus["alpha"][0].instances
    rng = np.random.default_rng(0)
    forest = train("rf", data, defaults("rf"), rng)
    train_acc = np.mean(forest.predict(data.features) == data.labels)
    idx = rng.integers(0, len(data), len(data))
    oob = np.setdiff1d(np.arange(len(data)), idx)
    cart = train("cart", data.subset(idx), defaults("cart"), rng)
    oob_acc = np.mean(cart.predict(data.features[oob]) == data.labels[oob])
    assert train_acc >= oob_acc


def test_regression_forest_mean_and_variance():
    rng = np.random.default_rng(0)
    x = rng.uniform(size=(60, 2))
    y = np.sin(6 * x[:, 0])
    forest = RegressionForest(n_estimators=20).fit(x, y, np.random.default_rng(1))
    mu, var = forest.predict(x)
    per_tree = forest.predict_per_tree(x)
    assert per_tree.shape == (20, 60)
    assert np.allclose(mu, per_tree.mean(axis=0))
    assert np.allclose(var, per_tree.var(axis=0))
    assert np.corrcoef(mu, y)[0, 1] > 0.95


# -- KNN ---------------------------------------------------------------------

def test_knn_nearest_point():
    # k=1 lies below the tuning range, so build the model directly.
    from dptune.learners.knn import KnnModel

    data = TrainSet([[0.0, 0.0], [1.0, 1.0]], [0, 1])
    model = KnnModel(data, 1, "uniform")
    assert model.predict([[0.1, 0.1]]).tolist() == [0]


def test_knn_k_equals_n_is_global_majority():
    data = blobs(10, 2, 0)
    data = TrainSet(data.features, [1, 1, 1, 1, 1, 1, 0, 0, 0, 0])
    model = train("knn", data, ParamSetting(n_neighbors=10, weights="uniform"))
    probe = np.random.default_rng(3).normal(size=(25, 2)) * 5
    assert np.all(model.predict(probe) == 1)


def test_knn_distance_exact_match_dominates():
    data = blobs(40, 3, 5, shift=0.2)
    model = train("knn", data, ParamSetting(n_neighbors=10, weights="distance"))
    assert np.array_equal(model.predict(data.features), data.labels)


def test_knn_vote_tie_goes_to_zero():
    data = TrainSet([[0.0], [2.0]], [1, 0])
    model = train("knn", data, ParamSetting(n_neighbors=2, weights="uniform"))
    assert model.predict([[1.0]]).tolist() == [0]


def test_knn_rejects_k_above_n():
    with pytest.raises(LearnerError):
        train("knn", blobs(4, 2), ParamSetting(n_neighbors=5, weights="uniform"))


# -- SVM ---------------------------------------------------------------------

def separable_1d(seed=0):
    rng = np.random.default_rng(seed)
    x = np.concatenate([-1 + 0.1 * rng.uniform(-1, 1, 15), 1 + 0.1 * rng.uniform(-1, 1, 15)])
    return TrainSet(x[:, None], np.repeat([0, 1], 15))


def test_svm_separable_clusters():
    data = separable_1d()
    params = ParamSetting(C=100.0, kernel="rbf", coef0=0.1, gamma=1.0)
    model = train("svm", data, params)
    assert np.array_equal(model.predict(data.features), data.labels)
    assert model.predict(data.features[[0, -1]]).tolist() == [0, 1]


def test_svm_kkt_conditions():
    data = blobs(60, 4, 1, shift=1.0)
    params = ParamSetting(C=10.0, kernel="rbf", coef0=0.1, gamma=0.3)
    model = train("svm", data, params)
    assert np.all(model.alpha >= 0) and np.all(model.alpha <= 10.0)
    assert model.kkt_gap < 1e-3
    y = np.where(data.labels == 1, 1.0, -1.0)
    assert abs(np.dot(model.alpha, y)) < 1e-8


def test_svm_single_class_errors():
    data = TrainSet(np.random.default_rng(0).normal(size=(10, 2)), np.ones(10))
    with pytest.raises(LearnerError):
        train("svm", data, defaults("svm"))


def test_svm_gamma_auto_is_one_over_features():
    data = blobs(30, 5, 2)
    model = train("svm", data, defaults("svm"))
    assert model.gamma == pytest.approx(1 / 5)


@pytest.mark.parametrize("family", ["knn", "svm"])
def test_scaling_invariance(family):
    data = blobs(40, 3, 6, shift=0.8)
    scaled = TrainSet(data.features * np.array([10.0, 0.01, 3.0]), data.labels)
    probe = np.random.default_rng(8).normal(size=(30, 3))
    params = (ParamSetting(n_neighbors=5, weights="distance") if family == "knn"
              else ParamSetting(C=5.0, kernel="rbf", coef0=0.1, gamma=0.5))
    a = train(family, data, params).predict(probe)
    b = train(family, scaled, params).predict(probe * np.array([10.0, 0.01, 3.0]))
    assert np.array_equal(a, b)


def test_smo_matches_independent_dual_solution():
    # Compare the SMO optimum against scipy's SLSQP on the same dual problem.
    from scipy.optimize import minimize

    data = blobs(24, 2, 7, shift=1.0)
    z = Standardizer(data.features).transform(data.features)
    y = np.where(data.labels == 1, 1.0, -1.0)
    k = kernel_matrix(z, z, "rbf", 0.5, 0.0)
    q = np.outer(y, y) * k
    alpha, _, _, _ = smo(k, y, 2.0, tol=1e-8, max_iter=100_000)
    res = minimize(lambda a: 0.5 * a @ q @ a - a.sum(), np.zeros(len(y)),
                   jac=lambda a: q @ a - 1, bounds=[(0, 2.0)] * len(y),
                   constraints=[{"type": "eq", "fun": lambda a: a @ y, "jac": lambda a: y}],
                   method="SLSQP", options={"ftol": 1e-12, "maxiter": 1000})
    dual = lambda a: 0.5 * a @ q @ a - a.sum()
    assert dual(alpha) == pytest.approx(dual(res.x), abs=1e-6)


def test_standardizer_constant_column():
    x = np.array([[1.0, 5.0], [3.0, 5.0]])
    z = Standardizer(x).transform(x)
    assert np.allclose(z[:, 1], 0.0)
    assert np.allclose(z[:, 0], [-1.0, 1.0])


# -- shared ------------------------------------------------------------------

@pytest.mark.parametrize("family", ["cart", "rf", "knn", "svm"])
def test_determinism_across_families(family):
    data = blobs(50, 4, 3, shift=0.9)
    probe = np.random.default_rng(1).normal(size=(20, 4))
    params = sample(builtin_space(family), np.random.default_rng(2))
    a = train(family, data, params, np.random.default_rng(7)).predict(probe)
    b = train(family, data, params, np.random.default_rng(7)).predict(probe)
    assert np.array_equal(a, b)
    assert set(np.unique(a)) <= {0, 1}


def test_illegal_params_rejected():
    with pytest.raises(LearnerError):
        train("cart", blobs(), defaults("cart", max_depth=0))
    with pytest.raises(LearnerError):
        train("nb", blobs(), {})


def test_predict_checks_feature_count():
    model = train("cart", blobs(20, 3), defaults("cart"), np.random.default_rng(0))
    with pytest.raises(LearnerError):
        model.predict(np.zeros((2, 4)))


def test_trainset_validation_and_copy():
    x = np.zeros((3, 2))
    data = TrainSet(x, [0, 1, 0])
    assert x.flags.writeable
    assert not data.features.flags.writeable
    for bad in [(np.zeros(3), [0, 1, 0]), (np.zeros((3, 2)), [0, 1]),
                (np.zeros((0, 2)), []), (np.full((1, 1), np.nan), [0]),
                (np.zeros((2, 1)), [0, 2])]:
        with pytest.raises(LearnerError):
            TrainSet(*bad)


def test_warm_up_runs():
    warm_up()
