import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secoe.learners import FAMILIES, ClassifierSpec, fit, impute, load_model, mlp_gradient_check, predict, save_model
from secoe.learners import mlp as mlp_mod
from secoe.learners.forest import DecisionTree, RandomForestClassifier
from secoe.learners.svm import LinearSVMClassifier
from synthetic import separable, xor

FAST = {
    "mlp": {"hidden": 16, "max_epochs": 300, "learning_rate": 1e-2},
    "random_forest": {"n_trees": 20},
    "linear_svm": {"epochs": 300},
}


@pytest.mark.parametrize("family", FAMILIES)
def test_separable_toy_reaches_full_training_accuracy(family):
    X, y = separable()
    model = fit(ClassifierSpec(family, FAST[family], 0), X, y)
    assert model.training_accuracy == 1.0
    assert np.array_equal(model.predict_matrix(X), y)


def test_linear_svm_cannot_fit_xor():
    X, y = xor()
    model = fit(ClassifierSpec("linear_svm", FAST["linear_svm"], 0), X, y)
    assert model.training_accuracy <= 0.75


@pytest.mark.parametrize("seed", range(3))
def test_mlp_and_forest_fit_xor(seed):
    X, y = xor(seed=seed)
    assert fit(ClassifierSpec("mlp", FAST["mlp"], seed), X, y).training_accuracy >= 0.98
    assert fit(ClassifierSpec("random_forest", FAST["random_forest"], seed), X, y).training_accuracy == 1.0


@pytest.mark.parametrize("family", FAMILIES)
def test_single_class_is_constant(family):
    X = np.random.default_rng(0).normal(size=(10, 3))
    model = fit(ClassifierSpec(family, {}, 0), X, np.full(10, 2), n_classes=4)
    assert model.predict_matrix(X).tolist() == [2] * 10
    assert model.training_accuracy == 1.0


def test_spec_validation():
    with pytest.raises(ValueError, match="unknown learner family"):
        ClassifierSpec("knn")
    with pytest.raises(ValueError, match="hyperparameters"):
        ClassifierSpec("mlp", {"depth": 3})
    with pytest.raises(ValueError):
        ClassifierSpec("mlp", {"hidden": 0})
    with pytest.raises(ValueError):
        ClassifierSpec("random_forest", {"max_features": "log2"})
    assert ClassifierSpec("mlp").resolved()["hidden"] == 100
    spec = ClassifierSpec("linear_svm", {"lam": 0.01}, 5)
    assert ClassifierSpec.from_dict(spec.to_dict()) == spec


def test_fit_rejects_mismatched_shapes():
    with pytest.raises(ValueError):
        fit(ClassifierSpec(), np.zeros((3, 2)), np.zeros(2, dtype=int))
    with pytest.raises(ValueError):
        fit(ClassifierSpec(), np.zeros((3, 2)), np.zeros(3, dtype=int), feature_subset=("A",))


def test_predict_single_record():
    X, y = separable()
    model = fit(ClassifierSpec("random_forest", FAST["random_forest"], 0), X, y)
    assert predict(model, X[5]) == y[5]
    with pytest.raises(ValueError):
        predict(model, X[:2])
    with pytest.raises(ValueError, match="expects 4"):
        model.predict_matrix(X[:, :3])


def test_model_standardizes_raw_input():
    X, y = separable()
    model = fit(ClassifierSpec("linear_svm", FAST["linear_svm"], 0), X, y)
    assert np.allclose(model.standardizer.means, X.mean(axis=0))
    assert np.array_equal(model.imputation_means, model.standardizer.means)


def test_impute_examples():
    means = np.array([1.0, 2.0, 3.0])
    x = np.array([9.0, np.nan, 7.0])
    assert impute(x, [1], means).tolist() == [9.0, 2.0, 7.0]
    assert impute(x, [], means)[0] == 9.0
    assert np.isnan(x[1])  # input untouched
    batch = impute(np.zeros((2, 3)), np.array([0, 2]), means)
    assert batch.tolist() == [[1.0, 0.0, 3.0]] * 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 8), st.integers(2, 5), st.integers(2, 6))
def test_gradient_check(seed, n, d, k):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = rng.integers(0, k, n)
    assert mlp_mod.gradient_check(X, y, k, hidden=5, seed=seed) < 1e-4


def test_gradient_check_through_spec():
    rng = np.random.default_rng(1)
    X, y = rng.normal(size=(6, 3)), np.array([0, 1, 2, 0, 1, 2])
    assert mlp_gradient_check(ClassifierSpec("mlp", {"hidden": 4}, 3), X, y) < 1e-4
    with pytest.raises(ValueError):
        mlp_gradient_check(ClassifierSpec("linear_svm"), X, y)


def test_zero_init_stays_finite():
    X, y = separable()
    est = mlp_mod.MLPClassifier(hidden=8, init="zeros", max_epochs=20)
    est.fit(X / 10.0, y, 3, np.random.default_rng(0))
    assert all(np.all(np.isfinite(w)) for w in est.get_state().values())
    assert np.all(np.isfinite(est.predict_proba(X / 10.0)))


def test_mlp_loss_trajectory_is_seeded():
    X, y = separable()
    a = mlp_mod.MLPClassifier(hidden=8, max_epochs=15).fit(X, y, 3, np.random.default_rng(4))
    b = mlp_mod.MLPClassifier(hidden=8, max_epochs=15).fit(X, y, 3, np.random.default_rng(4))
    c = mlp_mod.MLPClassifier(hidden=8, max_epochs=15).fit(X, y, 3, np.random.default_rng(5))
    assert a.loss_curve == b.loss_curve
    assert a.loss_curve != c.loss_curve


def test_mlp_early_stopping_cuts_epochs():
    X, y = separable()
    est = mlp_mod.MLPClassifier(hidden=8, learning_rate=0.05, max_epochs=5000, tol=1e-2)
    est.fit((X - X.mean(0)) / X.std(0), y, 3, np.random.default_rng(0))
    assert len(est.loss_curve) < 5000


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=8))
def test_softmax_sums_to_one(z):
    p = mlp_mod.softmax(np.array([z]))
    assert abs(p.sum() - 1.0) < 1e-9
    assert np.all(p >= 0)


def test_tree_grows_to_purity():
    X, y = xor(60)
    tree = DecisionTree(max_features="all").fit(X, y, 2, np.random.default_rng(0))
    assert np.array_equal(tree.predict(X), y)


def test_tree_depth_limit():
    X, y = xor(60)
    stump = DecisionTree(max_features="all", max_depth=1).fit(X, y, 2, np.random.default_rng(0))
    assert len(np.unique(stump.apply(X))) <= 2


def test_forest_single_tree_without_bootstrap_is_a_tree():
    X, y = separable()
    rf = RandomForestClassifier(n_trees=1, bootstrap=False, max_features="all")
    rf.fit(X, y, 3, np.random.default_rng(0))
    assert np.array_equal(rf.predict(X), y)
    assert len(rf.trees) == 1


def test_forest_is_seeded():
    X, y = xor(100)
    Xt = np.random.default_rng(9).uniform(-1.5, 1.5, size=(50, 2))
    a = RandomForestClassifier(n_trees=5).fit(X, y, 2, np.random.default_rng(1)).predict(Xt)
    b = RandomForestClassifier(n_trees=5).fit(X, y, 2, np.random.default_rng(1)).predict(Xt)
    assert np.array_equal(a, b)


def test_svm_decision_shape():
    X, y = separable()
    X = (X - X.mean(0)) / X.std(0)
    svm = LinearSVMClassifier(epochs=50).fit(X, y, 3, np.random.default_rng(0))
    assert svm.decision_function(X).shape == (X.shape[0], 3)


@pytest.mark.parametrize("family", FAMILIES)
def test_save_load_round_trip(tmp_path, family):
    X, y = xor(80)
    spec = ClassifierSpec(family, {**FAST[family], **({"max_epochs": 20} if family == "mlp" else {})}, 3)
    model = fit(spec, X, y, feature_subset=("C", "F"))
    path = tmp_path / "m.npz"
    save_model(model, path)
    again = load_model(path)
    assert again.feature_subset == ("C", "F")
    assert again.spec == spec
    assert again.training_accuracy == model.training_accuracy
    grid = np.random.default_rng(0).uniform(-2, 2, size=(100, 2))
    assert np.array_equal(again.predict_matrix(grid), model.predict_matrix(grid))


def test_save_load_constant(tmp_path):
    model = fit(ClassifierSpec("mlp"), np.zeros((3, 1)), np.ones(3, dtype=int), n_classes=2)
    save_model(model, tmp_path / "c.npz")
    assert load_model(tmp_path / "c.npz").predict_matrix(np.zeros((2, 1))).tolist() == [1, 1]


def test_load_rejects_foreign_file(tmp_path):
    np.savez(tmp_path / "x.npz", meta=np.array('{"format": "other"}'))
    with pytest.raises(ValueError, match="not a version"):
        load_model(tmp_path / "x.npz")
