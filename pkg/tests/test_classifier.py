import numpy as np
import pytest

from cgft.fusion import FeatureMatrix, argmax_predict, predict_scores, train_ovr_linear
from cgft.fusion.classifier import ClassifierModel


def make_two_clusters(seed=0, spread=0.2, n=50):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, spread, (n, 2)) + [-1.0, -1.0]
    b = rng.normal(0.0, spread, (n, 2)) + [1.0, 1.0]
    X = np.vstack([a, b])
    y = np.array([0] * n + [1] * n)
    return X, y


def assert_separable_by_diagonal(X, y):
    """Oracle: exhaustive margin check against the plane x1 + x2 = 0."""
    proj = X.sum(axis=1)
    assert (proj[y == 0] < 0).all() and (proj[y == 1] > 0).all()


def test_separable_clusters_reach_full_training_accuracy():
    X, y = make_two_clusters(seed=0)
    assert_separable_by_diagonal(X, y)
    model = train_ovr_linear(FeatureMatrix("m0", X), y, 2, seed=7)
    scores = predict_scores(model, FeatureMatrix("m0", X))
    assert (argmax_predict(scores) == y).all()


def test_singleton_classes_are_memorized():
    X = np.array([[0.0, 0.0], [5.0, 1.0], [-3.0, 4.0]])
    y = np.array([0, 1, 2])
    model = train_ovr_linear(FeatureMatrix("pts", X), y, 3, seed=1)
    scores = predict_scores(model, FeatureMatrix("pts", X))
    assert list(argmax_predict(scores)) == [0, 1, 2]


def test_training_is_deterministic():
    X, y = make_two_clusters(seed=3)
    fm = FeatureMatrix("m0", X)
    m1 = train_ovr_linear(fm, y, 2, seed=42)
    m2 = train_ovr_linear(fm, y, 2, seed=42)
    assert np.array_equal(m1.weights, m2.weights)
    assert np.array_equal(m1.biases, m2.biases)
    assert np.array_equal(m1.mean, m2.mean)
    assert np.array_equal(m1.std, m2.std)
    s1 = predict_scores(m1, fm)
    s2 = predict_scores(m2, fm)
    assert np.array_equal(s1.values, s2.values)


def test_missing_class_is_reported_by_index():
    X = np.zeros((4, 2))
    y = np.array([0, 0, 1, 1])
    with pytest.raises(ValueError, match="class 2"):
        train_ovr_linear(FeatureMatrix("m", X), y, 3, seed=0)


def test_non_finite_feature_reports_sample_index():
    bad = np.ones((5, 3))
    bad[3, 1] = np.nan
    with pytest.raises(ValueError, match="sample 3"):
        FeatureMatrix("m", bad)


def test_label_length_mismatch_rejected():
    X, y = make_two_clusters()
    with pytest.raises(ValueError, match="samples"):
        train_ovr_linear(FeatureMatrix("m", X), y[:-1], 2, seed=0)


def test_scores_are_normalized_probability_rows():
    X, y = make_two_clusters(seed=5)
    model = train_ovr_linear(FeatureMatrix("m0", X), y, 2, seed=9)
    scores = predict_scores(model, FeatureMatrix("m0", X))
    sums = scores.values.sum(axis=1)
    assert np.abs(sums - 1.0).max() <= 1e-6
    assert scores.values.min() > 0.0
    assert scores.values.max() < 1.0


def test_zero_model_gives_uniform_rows():
    model = ClassifierModel(
        "zero",
        weights=np.zeros((4, 3)),
        biases=np.zeros(4),
        mean=np.zeros(3),
        std=np.ones(3),
    )
    scores = predict_scores(model, FeatureMatrix("x", np.ones((6, 3))))
    assert np.allclose(scores.values, 0.25)


def test_dimension_mismatch_names_expected_and_actual():
    X, y = make_two_clusters()
    model = train_ovr_linear(FeatureMatrix("m0", X), y, 2, seed=0)
    with pytest.raises(ValueError, match="expects 2.*got 3"):
        predict_scores(model, FeatureMatrix("m0", np.ones((4, 3))))
