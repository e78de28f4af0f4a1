import json
import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from ecgwave.classifiers import (
    ESTIMATORS,
    KINDS,
    AdaBoostClassifier,
    DecisionTreeClassifier,
    GaussianNB,
    GradientBoostingClassifier,
    KNNClassifier,
    LinearSVC,
    MLPClassifier,
    ModelSpec,
    RandomForestClassifier,
    fit,
    load_model,
    make_estimator,
    mlp_gradient_check,
    predict,
    save_model,
)
from ecgwave.exceptions import (
    ModelFormatError,
    ModelVersionError,
    NotFittedError,
    SpecError,
    ValidationError,
)
from ecgwave.features import Standardizer

# Small settings that keep the slow learners quick in unit tests.
FAST = {
    "gradient_boost": {"n_estimators": 15},
    "mlp": {"hidden": (16, 16), "max_iter": 200},
    "adaboost": {"n_estimators": 30},
}


def fast_spec(kind, seed=0, **extra):
    return ModelSpec(kind, {**FAST.get(kind, {}), **extra}, seed)


def knn_oracle(Xtr, ytr, Q, k, p):
    """Exhaustive search: sort by (distance, training index), vote, ties to smallest class."""
    out = []
    for q in Q:
        d = [(sum(abs(a - b) ** p for a, b in zip(q, x)) ** (1.0 / p), i) for i, x in enumerate(Xtr)]
        d.sort()
        votes = {}
        for _, i in d[:k]:
            votes[ytr[i]] = votes.get(ytr[i], 0) + 1
        best = max(votes.values())
        out.append(min(c for c, v in votes.items() if v == best))
    return np.array(out)


@pytest.fixture(scope="module")
def clusters():
    r = np.random.default_rng(1)
    X = np.concatenate([-1 + 0.01 * r.uniform(-1, 1, 20), 1 + 0.01 * r.uniform(-1, 1, 20)])[:, None]
    y = np.repeat([0, 1], 20)
    return X, y


# --- uniform behaviour ------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS)
def test_separable_clusters_default_hyperparameters(kind, clusters):
    X, y = clusters
    model = fit(ModelSpec(kind), X, y)
    assert model.training_accuracy_ == 1.0
    np.testing.assert_array_equal(model.predict(X), y)


@pytest.mark.parametrize("kind", KINDS)
def test_probabilities_and_batch(kind, blobs):
    X, y = blobs
    model = fit(fast_spec(kind), X, y)
    batch = predict(model, X)
    assert batch.labels.shape == (X.shape[0],)
    assert set(np.unique(batch.labels)) <= set(model.classes_)
    np.testing.assert_allclose(batch.scores.sum(axis=1), 1.0)
    assert np.all(batch.scores >= 0)


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic_refit(kind, blobs):
    X, y = blobs
    a = fit(fast_spec(kind, seed=4), X, y)
    b = fit(fast_spec(kind, seed=4), X, y)
    np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))


@pytest.mark.parametrize("kind", KINDS)
def test_input_validation(kind, blobs):
    X, y = blobs
    est = make_estimator(fast_spec(kind))
    with pytest.raises(ValidationError, match="two classes"):
        est.fit(X, np.zeros(X.shape[0], dtype=int))
    bad = X.copy()
    bad[3, 1] = np.inf
    with pytest.raises(ValidationError):
        est.fit(bad, y)
    with pytest.raises(NotFittedError):
        est.predict(X)
    est.fit(X, y)
    with pytest.raises(ValidationError):
        est.predict(X[:, :3])


@pytest.mark.parametrize("kind", KINDS)
def test_sklearn_protocol(kind, blobs):
    X, y = blobs
    est = make_estimator(fast_spec(kind))
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    pipe = make_pipeline(Standardizer(), twin)
    pipe.fit(X, y)
    assert pipe.score(X, y) > 0.8


def test_labels_must_be_integral(blobs):
    X, y = blobs
    with pytest.raises(ValidationError, match="integer class ids"):
        DecisionTreeClassifier().fit(X, np.array(["N", "S", "V"])[y])
    with pytest.raises(ValidationError):
        DecisionTreeClassifier().fit(X, y + 0.5)
    # non-contiguous ids are kept as given
    model = DecisionTreeClassifier().fit(X, y * 2)
    assert model.classes_.tolist() == [0, 2, 4]


def test_spec_errors():
    with pytest.raises(SpecError, match="unknown classifier kind"):
        ModelSpec("svm_rbf")
    with pytest.raises(SpecError, match="unrecognized"):
        ModelSpec("knn", {"neighbours": 3})
    with pytest.raises(SpecError):
        ModelSpec("knn", seed=-1)


def test_spec_defaults():
    assert ModelSpec("knn").resolved_params()["k"] == 5
    assert ModelSpec("knn").resolved_params()["p"] == 1
    assert ModelSpec("decision_tree").resolved_params() == {"max_depth": 20}
    rf = ModelSpec("random_forest").resolved_params()
    assert (rf["max_depth"], rf["max_features"], rf["n_estimators"]) == (20, 5, 10)
    mlp = ModelSpec("mlp").resolved_params()
    assert (mlp["hidden"], mlp["alpha"], mlp["max_iter"], mlp["activation"]) == ((50, 100), 0.01, 1000, "tanh")
    assert ModelSpec("gradient_boost").resolved_params()["n_estimators"] == 300


def test_spec_round_trip():
    spec = ModelSpec("mlp", {"hidden": (8, 4)}, seed=9)
    assert ModelSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == ModelSpec(
        "mlp", spec.resolved_params(), 9
    )


def test_seed_reaches_estimator():
    assert make_estimator(ModelSpec("random_forest", seed=17)).random_state == 17


# --- KNN ----------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 3, 5, 8])
@pytest.mark.parametrize("p", [1, 2])
def test_knn_matches_exhaustive_oracle(k, p):
    r = np.random.default_rng(k * 10 + p)
    # integer coordinates create plenty of exact distance ties
    Xtr = r.integers(0, 4, size=(60, 3)).astype(float)
    ytr = r.integers(0, 3, size=60)
    Q = r.integers(0, 4, size=(200, 3)).astype(float)
    model = KNNClassifier(k=k, p=p).fit(Xtr, ytr)
    np.testing.assert_array_equal(model.predict(Q), knn_oracle(Xtr, ytr, Q, k, p))


def test_knn_continuous_oracle(rng):
    Xtr = rng.normal(size=(150, 5))
    ytr = rng.integers(0, 5, size=150)
    Q = rng.normal(size=(200, 5))
    model = KNNClassifier(chunk_size=37).fit(Xtr, ytr)
    np.testing.assert_array_equal(model.predict(Q), knn_oracle(Xtr, ytr, Q, 5, 1))


def test_knn_self_neighbour(rng):
    X = rng.normal(size=(30, 4))
    y = rng.integers(0, 3, size=30)
    model = KNNClassifier(k=1).fit(X, y)
    np.testing.assert_array_equal(model.predict(X), y)


def test_knn_synthetic_fixture(synthetic_features):
    X, y = synthetic_features
    model = KNNClassifier().fit(X, y)
    assert model.training_accuracy_ >= 0.95
    np.testing.assert_array_equal(model.predict(X[::7]), knn_oracle(X, y, X[::7], 5, 1))


def test_knn_rejects_large_k(blobs):
    X, y = blobs
    with pytest.raises(ValidationError):
        KNNClassifier(k=500).fit(X, y)


# --- Gaussian naive Bayes -----------------------------------------------------

def test_gaussian_nb_converges_to_generating_parameters():
    r = np.random.default_rng(0)
    n = 10_000
    mu = np.array([[0.0, 5.0, -2.0], [3.0, -1.0, 0.5]])
    sigma = np.array([[1.0, 2.0, 0.5], [0.7, 1.5, 3.0]])
    X = np.concatenate([r.normal(mu[c], sigma[c], size=(n, 3)) for c in range(2)])
    y = np.repeat([0, 1], n)
    nb = GaussianNB().fit(X, y)
    assert np.all(np.abs(nb.theta_ - mu) < 3 * sigma / math.sqrt(n))
    var_se = sigma**2 * math.sqrt(2.0 / n)
    assert np.all(np.abs(nb.var_ - sigma**2) < 3 * var_se)
    np.testing.assert_allclose(nb.class_prior_, [0.5, 0.5])


def test_gaussian_nb_closed_form(blobs):
    X, y = blobs
    nb = GaussianNB(var_smoothing=0.0).fit(X, y)
    for c in range(3):
        np.testing.assert_allclose(nb.theta_[c], X[y == c].mean(axis=0))
        np.testing.assert_allclose(nb.var_[c], X[y == c].var(axis=0))


# --- trees --------------------------------------------------------------------

def test_tree_depth_monotone(synthetic_features):
    X, y = synthetic_features
    accs = [DecisionTreeClassifier(max_depth=d).fit(X, y).training_accuracy_ for d in range(1, 12)]
    assert all(b >= a for a, b in zip(accs, accs[1:]))
    assert accs[-1] == 1.0


def test_tree_respects_max_depth(synthetic_features):
    X, y = synthetic_features
    for d in (1, 2, 3):
        assert DecisionTreeClassifier(max_depth=d).fit(X, y).tree_.depth <= d


def test_tree_matches_brute_force_stump(rng):
    X = rng.normal(size=(40, 3))
    y = (X[:, 1] > 0.2).astype(int)
    y[:3] = 1 - y[:3]
    stump = DecisionTreeClassifier(max_depth=1).fit(X, y).tree_

    def gini(labels):
        if labels.size == 0:
            return 0.0
        p = np.bincount(labels, minlength=2) / labels.size
        return 1.0 - np.sum(p**2)

    best = None
    for f in range(3):
        vals = np.unique(X[:, f])
        for t in (vals[:-1] + vals[1:]) / 2:
            left = X[:, f] <= t
            score = left.sum() * gini(y[left]) + (~left).sum() * gini(y[~left])
            if best is None or score < best[0] - 1e-12:
                best = (score, f, t)
    assert stump.feature[0] == best[1]
    assert math.isclose(stump.threshold[0], best[2])


@pytest.mark.parametrize("kind", ["decision_tree", "random_forest", "gradient_boost", "adaboost"])
def test_tree_family_scale_equivariance(kind, rng):
    X = rng.normal(size=(150, 6))
    y = (X[:, 0] + X[:, 2] ** 2 > 0.5).astype(int) + (X[:, 4] > 1).astype(int)
    Q = rng.normal(size=(100, 6))
    scale = rng.uniform(0.01, 100, size=6)
    a = fit(fast_spec(kind, seed=3), X, y).predict(Q)
    b = fit(fast_spec(kind, seed=3), X * scale, y).predict(Q * scale)
    np.testing.assert_array_equal(a, b)


def test_forest_seed_dependence(synthetic_features):
    X, y = synthetic_features
    a = RandomForestClassifier(random_state=1).fit(X, y)
    b = RandomForestClassifier(random_state=2).fit(X, y)
    assert a.tree_seeds_ != b.tree_seeds_
    assert len(a.estimators_) == 10


# --- boosting -----------------------------------------------------------------

def test_gradient_boosting_improves_with_stages(synthetic_features):
    X, y = synthetic_features
    few = GradientBoostingClassifier(n_estimators=1).fit(X, y)
    many = GradientBoostingClassifier(n_estimators=20).fit(X, y)
    assert many.training_accuracy_ >= few.training_accuracy_
    assert len(many.estimators_) == 20 and len(many.estimators_[0]) == 5


def test_gradient_boosting_init_is_log_prior(blobs):
    X, y = blobs
    model = GradientBoostingClassifier(n_estimators=1).fit(X, y)
    np.testing.assert_allclose(model.init_, np.log(np.bincount(y) / y.size))


def test_samme_weights(synthetic_features):
    X, y = synthetic_features
    model = AdaBoostClassifier(n_estimators=25).fit(X, y)
    k = 5
    assert np.all(np.isfinite(model.estimator_weights_))
    assert np.all(model.estimator_errors_ < 1 - 1 / k)
    expect = np.log((1 - model.estimator_errors_) / model.estimator_errors_) + np.log(k - 1)
    np.testing.assert_allclose(model.estimator_weights_, expect)


def test_samme_rejects_chance_stage():
    # A constant feature admits no split: the only stump predicts the
    # majority class. After one round of reweighting its error is exactly
    # 1 - 1/K, so the second stage is rejected and boosting stops.
    X = np.zeros((10, 1))
    y = np.array([0] * 7 + [1] * 3)
    model = AdaBoostClassifier(n_estimators=10).fit(X, y)
    assert len(model.estimators_) == 1
    assert model.rejected_stages_ == 1


def test_samme_first_stage_at_chance_raises():
    X = np.zeros((10, 1))
    y = np.array([0] * 5 + [1] * 5)
    with pytest.raises(ValidationError, match="no better than chance"):
        AdaBoostClassifier().fit(X, y)


# --- linear -------------------------------------------------------------------

def test_linear_svc_shapes_and_accuracy(blobs):
    X, y = blobs
    model = LinearSVC().fit(X, y)
    assert model.coef_.shape == (3, 4) and model.intercept_.shape == (3,)
    assert model.training_accuracy_ > 0.9
    np.testing.assert_array_equal(np.argmax(model.decision_function(X), axis=1), model.predict(X))


# --- MLP ----------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_mlp_gradient_check(seed):
    r = np.random.default_rng(seed)
    n, d = int(r.integers(3, 21)), int(r.integers(2, 11))
    X = r.normal(size=(n, d))
    y = r.integers(0, 3, size=n)
    est = MLPClassifier(hidden=(6, 5), random_state=seed)
    assert mlp_gradient_check(est, X, y) < 1e-5


def test_mlp_gradient_check_zero_init_and_single_sample(rng):
    X = rng.normal(size=(8, 4))
    y = rng.integers(0, 3, size=8)
    assert mlp_gradient_check(MLPClassifier(hidden=(5,)), X, y, zero_init=True) < 1e-5
    assert mlp_gradient_check(MLPClassifier(hidden=(5, 3), activation="logistic"), X[:1], y[:1]) < 1e-5


def test_mlp_training(blobs):
    X, y = blobs
    model = MLPClassifier(hidden=(10,), max_iter=100).fit(X, y)
    assert model.loss_curve_[-1] < model.loss_curve_[0]
    assert model.n_iter_ <= 100
    assert [w.shape for w in model.coefs_] == [(4, 10), (10, 3)]


def test_mlp_bad_activation(blobs):
    with pytest.raises(ValidationError):
        MLPClassifier(activation="relu6").fit(*blobs)


# --- persistence --------------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS)
def test_save_load_round_trip(kind, tmp_path, synthetic_features):
    X, y = synthetic_features
    model = fit(fast_spec(kind, seed=5), X, y)
    path = save_model(model, tmp_path / f"{kind}.json", seed=5)
    back = load_model(path, n_features=X.shape[1])
    assert type(back) is ESTIMATORS[kind]
    np.testing.assert_array_equal(back.predict(X), model.predict(X))
    np.testing.assert_allclose(back.predict_proba(X), model.predict_proba(X), rtol=0, atol=0)
    assert json.loads(path.read_text())["spec"]["seed"] == 5


def test_load_truncated(tmp_path, blobs):
    path = save_model(DecisionTreeClassifier().fit(*blobs), tmp_path / "m.json")
    path.write_text(path.read_text()[:50])
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_load_wrong_version(tmp_path, blobs):
    path = save_model(DecisionTreeClassifier().fit(*blobs), tmp_path / "m.json")
    doc = json.loads(path.read_text())
    doc["format_version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelVersionError):
        load_model(path)


def test_load_not_a_model(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"hello": 1}')
    with pytest.raises(ModelFormatError, match="header"):
        load_model(path)


def test_load_width_mismatch(tmp_path, blobs):
    path = save_model(GaussianNB().fit(*blobs), tmp_path / "m.json")
    with pytest.raises(ValidationError, match="expects 4 features"):
        load_model(path, n_features=40)
